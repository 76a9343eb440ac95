"""Two-bump data, the third Gateaux derivative of the mKdV flow, and
norm-inflation sweeps.

The datum has flat spectrum ``A = N^(1/4 - s)`` on ``[N, N + N^-1/2]``
and its mirror image. Its third Gateaux derivative at time ``t`` is

    u3 = -6 sign int_0^t exp(-(t - tau) d^3) d_x (exp(-tau d^3) u0)^3 dtau

and is computed three ways: trapezoid in ``tau`` (``u3_time_quadrature``),
exact time integration with a double sum over frequencies
(``u3_frequency_quadrature``), and third differences of the nonlinear flow
(``u3_gateaux_fd``).

Grids from ``ill_grid`` keep the band below ``3N``: the output near
``+-3N`` (all three inputs in the same bump) oscillates like
``exp(i t 24 N^3)`` and is not resolvable by a time quadrature, so that
part of the spectrum is truncated in every route alike.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .errors import ArgumentError, ResolutionError
from .estimates import RatioSweepResult
from .flows import EvolutionConfig, airy_phase, mkdv_solve
from .norms import NormSpec, norm
from .spectral import Grid, SpectralField, cube_coeffs

DEFAULT_T_EVAL = 0.1
DEFAULT_MODES = 32
MIN_MODES = 16
MIN_NODES = 64
MIN_DELTA = 1e-3
INFLATION_THRESHOLD = 0.05


def bump_width(N: float) -> float:
    return N ** -0.5


def ill_grid(N: float, modes_per_bump: int = DEFAULT_MODES,
             resolve_harmonic: bool = False) -> Grid:
    """Grid for the two-bump datum at frequency ``N``.

    ``L >= 2 pi K / w`` puts at least ``K`` modes in each bump of width
    ``w``, and the spacing ``2 pi / L`` always divides ``w``. By default
    the band edge lies in ``[2(N+w)+1, 3N-3w-1]``: the datum sits in the
    lower half of the band and the harmonic at ``3N`` is cut off. ``resolve_harmonic`` widens the band past ``3N + 3w``.
    """
    if N < 8:
        raise ArgumentError("N must be at least 8")
    if modes_per_bump < MIN_MODES:
        raise ArgumentError(f"modes_per_bump must be at least {MIN_MODES}")
    w = bump_width(N)
    L = 2 * math.pi * modes_per_bump / w
    if resolve_harmonic:
        lo, hi = 3 * (N + w) + 2, math.inf
    else:
        lo, hi = 2 * (N + w) + 1, 3 * N - 3 * w - 1
    n = 1 << int(math.ceil(math.log2(lo * L / math.pi)))
    if math.isfinite(hi) and math.pi * n / L > hi:
        # widen the torus, keeping the mode spacing a divisor of w
        k = math.ceil(n * w / (2 * hi) - 1e-9)
        L = 2 * math.pi * k / w
    return Grid(L, n)


@dataclass(frozen=True, eq=False)
class IllDatum:
    N: float
    s: float
    grid: Grid
    field: SpectralField

    @property
    def amplitude(self) -> float:
        return self.N ** (0.25 - self.s)


def make_ill_datum(N: float, s: float, grid: Grid | None = None) -> IllDatum:
    """Two-bump datum sampled exactly at the grid frequencies (closed intervals)."""
    if N < 8:
        raise ArgumentError("N must be at least 8")
    grid = grid or ill_grid(N)
    w = bump_width(N)
    if grid.dxi > w / MIN_MODES * (1 + 1e-12):
        need = 2 * math.pi * MIN_MODES / w
        raise ResolutionError(
            f"bumps of width N^-1/2 need 16 modes: L >= 32 pi sqrt(N) = {need:.6g}, "
            f"got L = {grid.length:.6g}")
    if N + w >= grid.nyquist:
        raise ResolutionError(f"datum at N = {N:g} exceeds the grid band {grid.nyquist:.6g}")
    xi = grid.freqs
    a = np.abs(xi)
    c = np.where((a >= N) & (a <= N + w), N ** (0.25 - s), 0.0)
    return IllDatum(float(N), float(s), grid, SpectralField(grid, c.astype(complex), True))


def _as_field(d) -> SpectralField:
    return d.field if isinstance(d, IllDatum) else d


def _finish(acc: np.ndarray, grid: Grid, t: float, sign: int) -> SpectralField:
    out = (-6.0 * sign * 1j) * grid.freqs * airy_phase(grid, t) * acc
    out[grid.n // 2] = 0.0
    return SpectralField(grid, out, True)


def u3_time_quadrature(datum, t: float = DEFAULT_T_EVAL, M: int = 128,
                       sign: int = -1) -> SpectralField:
    """Trapezoid rule with ``M`` intervals in ``tau``; exact Airy transport."""
    f = _as_field(datum)
    if int(M) != M or M < MIN_NODES:
        raise ArgumentError(f"M must be an integer >= {MIN_NODES}")
    if t < 0:
        raise ArgumentError("t must be non-negative")
    g = f.grid
    live = np.abs(f.coeffs) > 0
    if live.any() and np.max(np.abs(g.freqs[live])) > 0.5 * g.nyquist:
        raise ResolutionError("datum must lie in the lower half of the grid band")
    if t == 0 or not live.any():
        return SpectralField.zeros(g)
    xi3 = g.freqs ** 3
    step = np.exp(1j * (t / M) * xi3)
    fwd = np.array(f.coeffs)          # exp(i tau xi^3) u0^
    back = np.ones(g.n, dtype=complex)  # exp(-i tau xi^3)
    acc = np.zeros(g.n, dtype=complex)
    stepc = np.conj(step)
    for k in range(M + 1):
        if k:
            fwd *= step
            back *= stepc
        wk = 0.5 if k in (0, M) else 1.0
        acc += wk * back * cube_coeffs(fwd, g, True)
    return _finish(acc * (t / M), g, t, sign)


def u3_frequency_quadrature(datum, t: float = DEFAULT_T_EVAL, sign: int = -1,
                            skip_same_sign: bool = False) -> SpectralField:
    """Exact time integral: double sum of ``(exp(i t Phi) - 1) / (i Phi)``
    over input frequency triples. ``skip_same_sign`` drops the triples
    whose inputs all share one sign."""
    f = _as_field(datum)
    if t < 0:
        raise ArgumentError("t must be non-negative")
    g = f.grid
    live = np.nonzero(f.coeffs)[0]
    if t == 0 or live.size == 0:
        return SpectralField.zeros(g)
    j = g.index[live]
    raw = kernels.triple_interaction(j, f.coeffs[live], g.dxi, float(t), g.n,
                                     bool(skip_same_sign))
    return _finish(np.asarray(raw) * (g.dxi / (2 * math.pi)) ** 2, g, t, sign)


# ---------------------------------------------------------- Gateaux FD

@dataclass(frozen=True)
class GateauxConfig:
    """Third-difference settings. ``dt`` defaults to ``t_eval / 20``."""

    delta: float = 1e-2
    t_eval: float = DEFAULT_T_EVAL
    dt: float | None = None
    sign: int = -1
    integrator: str = "if-rk4"
    halving: bool = True

    def __post_init__(self):
        if not (MIN_DELTA <= self.delta < 1):
            raise ArgumentError(f"delta must lie in [{MIN_DELTA:g}, 1)")
        if not self.t_eval > 0:
            raise ArgumentError("t_eval must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ArgumentError("dt must be positive")

    def evolution(self) -> EvolutionConfig:
        dt = self.dt or self.t_eval / 20
        steps = max(1, int(math.ceil(self.t_eval / dt - 1e-9)))
        return EvolutionConfig(sign=self.sign, dt=self.t_eval / steps, T=self.t_eval,
                               sample_stride=steps, integrator=self.integrator)


@dataclass(frozen=True, eq=False)
class GateauxResult:
    central: SpectralField
    odd: SpectralField
    oddness_residual: float
    forms_difference: float
    halving_change: float | None = None
    halved: SpectralField | None = dc_field(default=None, repr=False)


def _rel(a: SpectralField, b: SpectralField) -> float:
    den = b.l2()
    return (a - b).l2() / den if den > 0 else (a - b).l2()


def u3_gateaux_fd(datum, cfg: GateauxConfig = GateauxConfig(), solver=None) -> GateauxResult:
    """Third differences of ``delta -> u(delta u0, t_eval)``.

    ``central = [u(2d) - 2u(d) + 2u(-d) - u(-2d)] / (2 d^3)`` and
    ``odd = [u(2d) - 2u(d)] / d^3``. ``solver(u0, EvolutionConfig)`` must
    return a trajectory ending at ``t_eval`` (default ``mkdv_solve``).
    With ``cfg.halving`` the central form is recomputed at ``d / 2``.
    """
    f = _as_field(datum)
    solve = solver or mkdv_solve
    ecfg = cfg.evolution()

    def end(amp):
        return solve(f * amp, ecfg)[-1]

    def central_at(d):
        up2, up1, dn1, dn2 = end(2 * d), end(d), end(-d), end(-2 * d)
        cen = (up2 - up1 * 2.0 + dn1 * 2.0 - dn2) / (2 * d ** 3)
        return cen, up2, up1, dn1

    d = cfg.delta
    cen, up2, up1, dn1 = central_at(d)
    odd = (up2 - up1 * 2.0) / d ** 3
    nu = up1.l2()
    resid = (up1 + dn1).l2() / nu if nu > 0 else 0.0
    halved = change = None
    if cfg.halving:
        halved = central_at(0.5 * d)[0]
        change = _rel(halved, cen)
    return GateauxResult(cen, odd, resid, _rel(odd, cen), change, halved)


# ------------------------------------------------------------ sweeps

def relative_l2(a: SpectralField, b: SpectralField) -> float:
    """``||a - b|| / ||b||``."""
    return _rel(a, b)


def u3_unit(N: float, t: float = DEFAULT_T_EVAL, M: int = 128,
            modes_per_bump: int = DEFAULT_MODES, route: str = "time",
            sign: int = -1, cache: dict | None = None) -> SpectralField:
    """``u3`` of the datum with unit amplitude; other amplitudes ``A`` scale
    it by ``A^3``. Results are memoized in ``cache`` when given."""
    key = (float(N), float(t), int(M), int(modes_per_bump), route, int(sign))
    if cache is not None and key in cache:
        return cache[key]
    d = make_ill_datum(N, 0.25, ill_grid(N, modes_per_bump))
    if route == "time":
        u3 = u3_time_quadrature(d, t, M, sign)
    elif route == "frequency":
        u3 = u3_frequency_quadrature(d, t, sign)
    else:
        raise ArgumentError(f"route must be 'time' or 'frequency', got {route!r}")
    if cache is not None:
        cache[key] = u3
    return u3


def inflation_sweep(s: float, q: float, N_list, t: float = DEFAULT_T_EVAL, M: int = 128,
                    modes_per_bump: int = DEFAULT_MODES, route: str = "time",
                    sign: int = -1, cache: dict | None = None,
                    max_n: int = 1 << 22) -> RatioSweepResult:
    """``||u3||_{M^s_{2,q}}`` per ``N`` with its fitted growth exponent.

    Points whose grid would exceed ``max_n`` are skipped with a warning and
    listed in ``metadata['skipped']``. ``metadata['inflating']`` is true
    when the fitted exponent exceeds 0.05, i.e. ``||u3||`` outgrows
    ``||u0||^3 ~ 1``.
    """
    spec = NormSpec.modulation(s, q)
    Ns, vals, data_norms, skipped, grids = [], [], [], [], []
    for N in sorted(float(v) for v in N_list):
        grid = ill_grid(N, modes_per_bump)
        if grid.n > max_n:
            warnings.warn(f"N = {N:g} needs n = {grid.n} > {max_n}; skipped")
            skipped.append(N)
            continue
        amp = N ** (0.25 - s)
        u3 = u3_unit(N, t, M, modes_per_bump, route, sign, cache) * amp ** 3
        Ns.append(N)
        vals.append(norm(u3, spec))
        data_norms.append(norm(make_ill_datum(N, s, grid).field, spec))
        grids.append((grid.length, grid.n))
    res = RatioSweepResult.from_measurements(Ns, vals)
    meta = {"s": s, "q": q, "t": t, "M": M, "modes_per_bump": modes_per_bump,
            "route": route, "sign": sign, "expected_exponent": 0.5 - 2 * s,
            "datum_norms": data_norms, "skipped": skipped, "grids": grids,
            "inflating": bool(res.fitted_exponent > INFLATION_THRESHOLD)}
    return RatioSweepResult(res.abscissae, res.measured, res.fitted_exponent,
                            res.fit_residual, meta)


# ------------------------------------------------------- continuity

@dataclass(frozen=True)
class ContinuityRecord:
    ratio: float
    times: np.ndarray
    differences: np.ndarray
    initial_difference: float


def continuity_probe(u0: SpectralField, v0: SpectralField, s: float, q: float,
                     cfg: EvolutionConfig, solver=None) -> ContinuityRecord:
    """``sup_t ||u(t) - v(t)||_{M^s_{2,q}} / ||u0 - v0||_{M^s_{2,q}}``."""
    if u0.grid != v0.grid:
        raise ArgumentError("u0 and v0 must share a grid")
    spec = NormSpec.modulation(s, q)
    if np.array_equal(u0.coeffs, v0.coeffs):
        return ContinuityRecord(0.0, np.zeros(1), np.zeros(1), 0.0)
    solve = solver or mkdv_solve
    a = solve(u0, cfg)
    b = solve(v0, cfg)
    diffs = np.array([norm(a[k] - b[k], spec) for k in range(len(a))])
    d0 = norm(u0 - v0, spec)
    return ContinuityRecord(float(diffs.max() / d0), a.times.copy(), diffs, d0)
