"""Linear Airy flow, the scaling symmetry and mKdV time stepping.

The equation is ``u_t + u_xxx + sign * kappa * (u^3)_x = 0`` with
``sign = +1`` focusing and ``sign = -1`` defocusing. In Fourier variables
the linear part is the diagonal multiplier ``exp(i t xi^3)``, so both
integrators treat it exactly and step only the cubic term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, BlowUpError, NumericError, ResolutionError
from .norms import Trajectory
from .spectral import Grid, SpectralField, cube_coeffs, realify, to_spectral

INTEGRATORS = ("if-rk4", "strang")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class EvolutionConfig:
    """Time-stepping parameters.

    ``dt`` is shrunk so that ``T`` is a whole number of steps, and samples
    are kept every ``sample_stride`` steps (which must divide the step
    count). ``nonlinearity`` scales the cubic term; 0 gives the Airy flow.
    """

    sign: int = -1
    dt: float = 1e-3
    T: float = 1.0
    sample_stride: int = 1
    integrator: str = "if-rk4"
    nonlinearity: float = 1.0
    blowup_factor: float = 1e6

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ArgumentError("sign must be +1 (focusing) or -1 (defocusing)")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ArgumentError("dt must be positive")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ArgumentError("T must be positive")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ArgumentError("sample_stride must be an integer >= 1")
        if self.integrator not in INTEGRATORS:
            raise ArgumentError(f"integrator must be one of {INTEGRATORS}")
        if not math.isfinite(self.nonlinearity):
            raise ArgumentError("nonlinearity must be finite")
        if not self.blowup_factor > 1:
            raise ArgumentError("blowup_factor must exceed 1")
        if self.steps % self.sample_stride:
            raise ArgumentError(
                f"sample_stride={self.sample_stride} does not divide the {self.steps} steps")

    @property
    def steps(self) -> int:
        return max(1, int(math.ceil(self.T / self.dt - 1e-9)))

    @property
    def step(self) -> float:
        """Effective step ``T / steps``."""
        return self.T / self.steps


# ------------------------------------------------------------ linear flow

def airy_phase(grid: Grid, t: float) -> np.ndarray:
    xi = grid.freqs
    return np.exp(1j * t * (xi * xi * xi))


def airy_propagate(f: SpectralField, t: float) -> SpectralField:
    """Free evolution ``exp(-t d^3/dx^3) f``: multiply by ``exp(i t xi^3)``."""
    c = f.coeffs * airy_phase(f.grid, t)
    if f.real:
        c[f.grid.n // 2] = 0.0
    return SpectralField(f.grid, c, f.real)


def scaling_map(f: SpectralField, lam: float, target: Grid | None = None) -> SpectralField:
    """``lam * f(lam * x)``, i.e. ``g_hat(xi) = f_hat(xi / lam)``.

    Without a target the torus is dilated with the data: the result lives on
    ``Grid(L / lam, n)`` and carries the same coefficients, which makes the
    map exact. A target with ``lam * L_target = m * L`` for a power of two
    ``m`` is reached by zero-padding the samples to length ``m * L``, which
    requires ``f`` to be negligible near the torus edge.
    """
    if not (lam > 0 and math.isfinite(lam)):
        raise ArgumentError("lam must be positive")
    src = f.grid
    if target is None:
        return SpectralField(Grid(src.length / lam, src.n), f.coeffs, f.real)
    live = np.abs(f.coeffs) > 0
    if live.any():
        top = lam * np.max(np.abs(src.freqs[live]))
        if top >= target.nyquist:
            raise ResolutionError(
                f"dilated spectrum reaches |xi| = {top:.6g} beyond the target band "
                f"{target.nyquist:.6g}; use n >= {_pow2_above(top * target.length / math.pi)}")
    m_real = lam * target.length / src.length
    m = int(round(m_real))
    if m < 1 or abs(m - m_real) > 1e-9 * m_real or m & (m - 1):
        raise ArgumentError(
            "lam * target.length / source.length must be a power of two, "
            f"got {m_real:.6g}")
    pad = Grid(src.length * m, src.n * m)
    u = f.physical()
    big = np.zeros(pad.n, dtype=u.dtype)
    start = (pad.n - src.n) // 2
    big[start:start + src.n] = u
    F = to_spectral(big, pad).coeffs
    j = target.index
    ok = np.abs(j) < pad.n // 2
    c = np.zeros(target.n, dtype=complex)
    c[ok] = F[j[ok] % pad.n]
    if f.real:
        c[target.n // 2] = 0.0
    return SpectralField(target, c, f.real)


def _pow2_above(x: float) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(x, 1.0)))))


# --------------------------------------------------------------- solver

def cubic_term(c: np.ndarray, grid: Grid, real: bool, coef: float) -> np.ndarray:
    """Fourier coefficients of ``-coef * (u^3)_x``."""
    return (-coef * 1j) * grid.freqs * cube_coeffs(c, grid, real)


def _if_rk4_step(c, grid, real, coef, E, E2, dt):
    k1 = cubic_term(c, grid, real, coef)
    k2 = cubic_term(E2 * (c + 0.5 * dt * k1), grid, real, coef)
    k3 = cubic_term(E2 * c + 0.5 * dt * k2, grid, real, coef)
    k4 = cubic_term(E * c + dt * (E2 * k3), grid, real, coef)
    return E * c + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)


def _strang_step(c, grid, real, coef, E, E2, dt):
    c = E2 * c
    k1 = cubic_term(c, grid, real, coef)
    k2 = cubic_term(c + 0.5 * dt * k1, grid, real, coef)
    k3 = cubic_term(c + 0.5 * dt * k2, grid, real, coef)
    k4 = cubic_term(c + dt * k3, grid, real, coef)
    c = c + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return E2 * c


_STEPPERS = {"if-rk4": _if_rk4_step, "strang": _strang_step}


def mkdv_solve(u0: SpectralField, cfg: EvolutionConfig) -> Trajectory:
    """Integrate from ``u0`` over ``[0, cfg.T]``; samples every ``sample_stride`` steps.

    Raises BlowUpError (carrying the partial trajectory) when the sup norm
    exceeds ``blowup_factor`` times its initial value, and NumericError on
    non-finite coefficients.
    """
    if not u0.real:
        raise ArgumentError("mkdv_solve expects a real-valued initial datum")
    grid = u0.grid
    dt = cfg.step
    E = airy_phase(grid, dt)
    E2 = airy_phase(grid, 0.5 * dt)
    coef = cfg.sign * cfg.nonlinearity
    stepper = _STEPPERS[cfg.integrator]
    c = realify(np.array(u0.coeffs), grid)
    sup0 = float(np.max(np.abs(SpectralField(grid, c, True).physical())))
    limit = cfg.blowup_factor * sup0
    times = [0.0]
    rows = [c.copy()]
    linear = coef == 0
    # overflow is reported below as NumericError, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, cfg.steps + 1):
            c = E * c if linear else stepper(c, grid, True, coef, E, E2, dt)
            c = realify(c, grid)
            if k % cfg.sample_stride:
                continue
            t = k * dt
            if not np.all(np.isfinite(c)):
                raise NumericError(f"non-finite coefficients at t = {t:.6g}")
            sup = float(np.max(np.abs(SpectralField(grid, c, True).physical())))
            if sup0 > 0 and sup > limit:
                partial = Trajectory(grid, times, np.array(rows), True)
                raise BlowUpError(
                    f"sup norm {sup:.3g} exceeds {cfg.blowup_factor:g} x initial at t = {t:.6g}",
                    last_valid_time=times[-1], trajectory=partial)
            times.append(t)
            rows.append(c.copy())
    return Trajectory(grid, np.array(times), np.array(rows), True)


# --------------------------------------------------------------- Duhamel

def nonlinear_source(tr: Trajectory) -> Trajectory:
    """Samples of ``(u^3)_x`` along a trajectory."""
    g = tr.grid
    rows = np.array([1j * g.freqs * cube_coeffs(c, g, tr.real) for c in tr.coeffs])
    if tr.real:
        rows[:, g.n // 2] = 0.0
    return Trajectory(g, tr.times, rows, tr.real)


def duhamel_term(source: Trajectory, t: float, propagate: bool = True) -> SpectralField:
    """``int_{t0}^t exp(-(t - s) d^3) f(s) ds`` by trapezoid over the samples.

    ``t0`` is the first sample time and ``t`` must itself be a sample time.
    With ``propagate=False`` the transport is skipped (plain time integral).
    """
    g = source.grid
    k = source.index_of(t)
    if k == 0:
        return SpectralField.zeros(g, source.real)
    tau = source.times[:k + 1]
    w = np.full(k + 1, source.dt)
    w[0] = w[-1] = 0.5 * source.dt
    acc = np.zeros(g.n, dtype=complex)
    xi3 = g.freqs ** 3
    for wk, tk, row in zip(w, tau, source.coeffs[:k + 1]):
        acc += (wk * np.exp(1j * (t - tk) * xi3) if propagate else wk) * row
    if source.real:
        acc[g.n // 2] = 0.0
    return SpectralField(g, acc, source.real)


# ---------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class ConservedQuantities:
    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray

    @staticmethod
    def _drift(v: np.ndarray) -> float:
        ref = abs(v[0])
        dev = float(np.max(np.abs(v - v[0])))
        return dev / ref if ref > 0 else dev

    @property
    def mass_drift(self) -> float:
        """Max relative deviation of the mass from its initial value."""
        return self._drift(self.mass)

    @property
    def energy_drift(self) -> float:
        return self._drift(self.energy)


def conserved_quantities(tr: Trajectory, sign: int = -1,
                         nonlinearity: float = 1.0) -> ConservedQuantities:
    """Mass ``int u^2`` and energy ``int u_x^2/2 - sign * kappa * u^4/4`` per sample."""
    if not tr.real:
        raise ArgumentError("conserved quantities need a real trajectory")
    g = tr.grid
    w = g.dxi / (2 * np.pi)
    e = tr.coeffs.real ** 2 + tr.coeffs.imag ** 2
    mass = np.sum(e, axis=1) * w
    grad = 0.5 * np.sum(e * g.freqs ** 2, axis=1) * w
    # u^2 has twice the band, so u^4 integrates exactly on the 2n grid
    quart = np.empty(len(tr))
    half = g.n // 2
    for k, c in enumerate(tr.coeffs):
        r = np.zeros(g.n + 1, dtype=complex)
        r[:half] = c[:half]
        u = np.fft.irfft(r, 2 * g.n) * (2 * g.n / g.length)
        quart[k] = np.sum(u ** 4) * (g.dx / 2)
    energy = grad - sign * nonlinearity * quart / 4.0
    return ConservedQuantities(tr.times.copy(), mass, energy)


# ----------------------------------------------------------- checkpoint

def save_trajectory(tr: Trajectory, path) -> None:
    """Write a lossless ``.npz`` checkpoint."""
    np.savez(path, format_version=np.int64(FORMAT_VERSION),
             length=np.float64(tr.grid.length), n=np.int64(tr.grid.n),
             times=tr.times, coeffs=tr.coeffs, real=np.bool_(tr.real))


def load_trajectory(path) -> Trajectory:
    with np.load(path) as z:
        version = int(z["format_version"])
        if version != FORMAT_VERSION:
            raise ArgumentError(f"unsupported checkpoint format version {version}")
        grid = Grid(float(z["length"]), int(z["n"]))
        return Trajectory(grid, z["times"], z["coeffs"], bool(z["real"]))
