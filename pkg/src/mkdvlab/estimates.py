"""Dispersive estimates for the Airy group, measured numerically.

Strichartz ratios, dyadic Strichartz decay, bilinear decay of products of
frequency-separated free waves (with a closed-form space-time Fourier
oracle), free L^4 norms, the cubic resonance function and power-law fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import ArgumentError, DegenerateSeparationError, ResolutionError
from .norms import INF, time_integral
from .spectral import Grid, SpectralField

DEFAULT_T = 1.0
DEFAULT_M = 256
SING_EPS = 1e-6
RESOLUTION_TOL = 5e-3


def sub_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for sweep point ``index`` under master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


# ------------------------------------------------------------ fitting

def fit_power_law(abscissae, values):
    """Least-squares slope of ``log(values)`` against ``log(abscissae)``.

    Returns ``(exponent, residual)`` with the residual the largest absolute
    deviation from the fitted line in log space.
    """
    x = np.asarray(abscissae, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ArgumentError("abscissae and values must be 1-d arrays of equal length")
    if x.size < 3:
        raise ArgumentError("a power-law fit needs at least 3 points")
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        raise ArgumentError("values must be finite and positive")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ArgumentError("abscissae must be finite and positive")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = float(np.max(np.abs(ly - (slope * lx + icpt))))
    return float(slope), resid


@dataclass(frozen=True)
class RatioSweepResult:
    """Measured quantity per abscissa with its fitted power law.

    With fewer than 3 points the fit fields are NaN.
    """

    abscissae: np.ndarray
    measured: np.ndarray
    fitted_exponent: float
    fit_residual: float
    metadata: dict = dc_field(default_factory=dict)

    @classmethod
    def from_measurements(cls, abscissae, measured, metadata=None) -> "RatioSweepResult":
        x = np.asarray(abscissae, dtype=float)
        y = np.asarray(measured, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or x.size == 0:
            raise ArgumentError("abscissae and measured must be equal-length 1-d arrays")
        if np.any(np.diff(x) <= 0):
            raise ArgumentError("abscissae must be strictly increasing")
        if x.size >= 3:
            e, r = fit_power_law(x, y)
        else:
            e, r = math.nan, math.nan
        return cls(x, y, e, r, dict(metadata or {}))


# ---------------------------------------------------------- resonance

def resonance(xi, xi1, xi2):
    """``-3 (xi - xi1)(xi - xi2)(xi1 + xi2)``."""
    xi, xi1, xi2 = np.asarray(xi), np.asarray(xi1), np.asarray(xi2)
    out = -3.0 * ((xi - xi1) * (xi - xi2)) * (xi1 + xi2)
    return out if out.ndim else float(out)


def resonance_identity_check(xi1, xi2, xi3, relative: bool = False):
    """Residual of ``x0^3 - x1^3 - x2^3 - x3^3 = 3 (x0-x1)(x0-x2)(x0-x3)``,
    ``x0 = x1 + x2 + x3``. With ``relative`` the residual is divided by the
    sum of the absolute cubes."""
    a, b, c = (np.asarray(v, dtype=float) for v in (xi1, xi2, xi3))
    s = a + b + c
    lhs = s ** 3 - a ** 3 - b ** 3 - c ** 3
    rhs = 3.0 * (s - a) * (s - b) * (s - c)
    res = np.abs(lhs - rhs)
    if relative:
        scale = np.abs(s) ** 3 + np.abs(a) ** 3 + np.abs(b) ** 3 + np.abs(c) ** 3
        res = np.where(scale > 0, res / np.where(scale > 0, scale, 1.0), 0.0)
    return res if res.ndim else float(res)


# --------------------------------------------------------- free waves

def _time_nodes(T: float, M: int) -> np.ndarray:
    if not (T > 0 and math.isfinite(T)):
        raise ArgumentError("T must be positive")
    if int(M) != M or M < 2:
        raise ArgumentError("M (time intervals) must be an integer >= 2")
    return np.linspace(0.0, T, int(M) + 1)


def free_space_norms(coeffs: np.ndarray, grid: Grid, T: float, M: int, q: float,
                     t0: float = 0.0) -> np.ndarray:
    """``||exp(-t d^3) f||_{L^q_x}`` at ``t = t0 + T k / M``.

    ``coeffs`` may hold one field or a batch (rows); the result has shape
    ``(M + 1,)`` or ``(M + 1, batch)``.
    """
    times = _time_nodes(T, M)
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    xi3 = grid.freqs ** 3
    cur = c * (grid.parity * np.exp(1j * t0 * xi3))
    step = np.exp(1j * (times[1] - times[0]) * xi3)
    out = np.empty((times.size, c.shape[0]))
    for k in range(times.size):
        if k:
            cur *= step
        u = sfft.ifft(cur, axis=1) / grid.dx
        a = u.real ** 2 + u.imag ** 2
        if q == INF:
            out[k] = np.sqrt(a.max(axis=1))
        elif q == 2:
            out[k] = np.sqrt(a.sum(axis=1) * grid.dx)
        else:
            out[k] = (np.sum(a ** (q / 2), axis=1) * grid.dx) ** (1.0 / q)
    return out[:, 0] if np.ndim(coeffs) == 1 else out


def _admissible(p: float, q: float) -> None:
    p, q = float(p), float(q)
    if p < 4:
        raise ArgumentError(f"(p, q) = ({p:g}, {q:g}) violates p >= 4")
    if q < 2:
        raise ArgumentError(f"(p, q) = ({p:g}, {q:g}) violates q >= 2")
    lhs = (0.0 if p == INF else 2.0 / p) + (0.0 if q == INF else 1.0 / q)
    if abs(lhs - 0.5) > 1e-12:
        raise ArgumentError(f"(p, q) = ({p:g}, {q:g}) violates 2/p + 1/q = 1/2 (got {lhs:.6g})")


def check_admissible(p, q) -> None:
    """Raise ArgumentError naming the violated relation unless ``(p, q)`` is admissible."""
    _admissible(p, q)


def strichartz_ratio(phi: SpectralField, p, q, T: float = DEFAULT_T,
                     M: int = DEFAULT_M) -> float:
    """``|| |D|^(1/p) exp(-t d^3) phi ||_{L^p_t L^q_x([0,T])} / ||phi||_2``
    with ``M`` trapezoid intervals in time."""
    p, q = float(p), float(q)
    _admissible(p, q)
    if phi.is_zero():
        raise ArgumentError("phi must be nonzero")
    c = phi.coeffs
    if p != INF:
        c = c * np.abs(phi.grid.freqs) ** (1.0 / p)
    g = free_space_norms(c, phi.grid, T, M, q)
    return time_integral(g, _time_nodes(T, M), p) / phi.l2()


def free_l4_norm(f: SpectralField, T: float = DEFAULT_T, M: int = DEFAULT_M) -> float:
    """``||exp(-t d^3) f||_{L^4_{x,t}([0,T])}``."""
    g = free_space_norms(f.coeffs, f.grid, T, M, 4.0)
    return time_integral(g, _time_nodes(T, M), 4.0)


# ------------------------------------------------- dyadic Strichartz

def dyadic_grid(N: float, length: float = 256.0, max_n: int = 1 << 20) -> Grid:
    """Smallest power-of-two grid whose band holds ``|xi| < N`` with margin 2."""
    need = 2.0 * N * length / math.pi
    n = 1 << max(4, int(math.ceil(math.log2(need))))
    if n > max_n:
        raise ResolutionError(f"N = {N:g} needs n >= {n} on L = {length:g} (cap {max_n})")
    return Grid(length, n)


def dyadic_packet_family(grid: Grid, N: float, count: int, rng: np.random.Generator,
                         T: float = DEFAULT_T, focus_scale: float = 0.02) -> np.ndarray:
    """``count`` one-sided Gaussian wave packets in the band ``|xi| in [N/2, N)``.

    Each packet has a random centre in the inner 80% of the band, a width
    set so it spreads over a time ``focus_scale``, and focuses at a random
    time in ``[0.3T, 0.7T]`` and position in ``[-L/4, L/4]``. Rows are
    coefficient arrays normalized to unit L^2.
    """
    if N >= grid.nyquist:
        raise ResolutionError(f"N = {N:g} exceeds the grid band {grid.nyquist:.6g}")
    lo, hi = (0.0, 1.0) if N <= 1 else (0.5 * N, float(N))
    xi = grid.freqs
    band = (np.abs(xi) >= lo) & (np.abs(xi) < hi)
    if not band.any():
        raise ResolutionError(f"no grid frequencies in the band of N = {N:g}")
    out = np.empty((count, grid.n), dtype=complex)
    for r in range(count):
        xc = rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))
        sig = 1.0 / math.sqrt(6.0 * max(xc, 0.5) * focus_scale)
        t0 = rng.uniform(0.3, 0.7) * T
        x0 = rng.uniform(-0.25, 0.25) * grid.length
        arg = -((xi - xc) ** 2) / (4 * sig * sig) - 1j * (xi * x0 + t0 * xi ** 3)
        out[r] = np.where(band, np.exp(arg), 0.0)
    l2 = np.sqrt(np.sum(np.abs(out) ** 2, axis=1) * grid.dxi / (2 * np.pi))
    return out / l2[:, None]


def strichartz_dyadic_decay(N_list, T: float = DEFAULT_T, count: int = 20, seed: int = 0,
                            length: float = 256.0, M: int = DEFAULT_M,
                            max_n: int = 1 << 20, p=8.0, q=4.0) -> RatioSweepResult:
    """Max over ``count`` random packets of ``||P_N exp(-t d^3) phi||_{L^p_t L^q_x}``
    per ``N``, with a power-law fit against ``N`` (expected slope ``-1/p``).

    Each ``N`` uses its own grid (``dyadic_grid``). Halving the number of
    time intervals must change every maximum by less than 0.5%, otherwise
    the point is listed under ``metadata['under_resolved']``.
    """
    p, q = float(p), float(q)
    _admissible(p, q)
    Ns = [float(N) for N in N_list]
    for N in Ns:
        if N < 1 or abs(math.log2(N) - round(math.log2(N))) > 1e-12:
            raise ArgumentError(f"N = {N:g} is not a dyadic number >= 1")
    if M % 2:
        raise ArgumentError("M must be even (step-halving check)")
    times = _time_nodes(T, M)
    maxima, coarse, grids, flagged = [], [], [], []
    for idx, N in enumerate(Ns):
        grid = dyadic_grid(N, length, max_n)
        fam = dyadic_packet_family(grid, N, count, sub_rng(seed, idx), T)
        g = free_space_norms(fam, grid, T, M, q)
        fine = [time_integral(col, times, p) for col in g.T]
        half = [time_integral(col[::2], times[::2], p) for col in g.T]
        maxima.append(float(max(fine)))
        coarse.append(float(max(half)))
        grids.append((grid.length, grid.n))
        if abs(coarse[-1] / maxima[-1] - 1) > RESOLUTION_TOL:
            flagged.append(N)
    meta = {"T": T, "M": M, "p": p, "q": q, "count": count, "seed": seed, "grids": grids,
            "coarse_maxima": coarse, "under_resolved": flagged,
            "expected_exponent": 0.0 if p == INF else -1.0 / p}
    return RatioSweepResult.from_measurements(Ns, maxima, meta)


# ------------------------------------------------------------ bilinear

def _interval_distance(a, b) -> float:
    return max(0.0, b[0] - a[1], a[0] - b[1])


@dataclass(frozen=True, eq=False)
class SeparatedPair:
    """Two unit-L^2 fields with Fourier supports in the intervals ``I1``, ``I2``.

    ``lam = dist(I1, I2)`` and ``mu = dist(I1, -I2)`` are derived from the
    intervals. Optional ``u_profile`` / ``v_profile`` give the exact
    transforms as functions of ``xi`` for the spectral oracle.
    """

    u0: SpectralField
    v0: SpectralField
    I1: tuple
    I2: tuple
    u_profile: Callable | None = None
    v_profile: Callable | None = None

    def __post_init__(self):
        if self.u0.grid != self.v0.grid:
            raise ArgumentError("u0 and v0 must share a grid")
        xi = self.u0.grid.freqs
        for f, (a, b), name in ((self.u0, self.I1, "u0"), (self.v0, self.I2, "v0")):
            if not a <= b:
                raise ArgumentError(f"interval of {name} is empty")
            outside = (xi < a) | (xi > b)
            if np.any(f.coeffs[outside] != 0):
                raise ArgumentError(f"{name} has spectrum outside [{a:g}, {b:g}]")

    @property
    def grid(self) -> Grid:
        return self.u0.grid

    @property
    def lam(self) -> float:
        return _interval_distance(self.I1, self.I2)

    @property
    def mu(self) -> float:
        return _interval_distance(self.I1, (-self.I2[1], -self.I2[0]))

    @classmethod
    def from_fields(cls, u0: SpectralField, v0: SpectralField, **profiles) -> "SeparatedPair":
        """Normalize both fields and take the intervals from their supports."""
        if u0.is_zero() or v0.is_zero():
            raise ArgumentError("both fields must be nonzero")
        iv = []
        for f in (u0, v0):
            s = f.support()
            iv.append((float(s[0]), float(s[-1])))
        nu, nv = u0.l2(), v0.l2()
        up, vp = profiles.get("u_profile"), profiles.get("v_profile")
        return cls(u0 / nu, v0 / nv, iv[0], iv[1],
                   None if up is None else (lambda x, f=up: f(x) / nu),
                   None if vp is None else (lambda x, f=vp: f(x) / nv))

    def swapped(self) -> "SeparatedPair":
        return SeparatedPair(self.v0, self.u0, self.I2, self.I1, self.v_profile, self.u_profile)

    def profile_values(self, which: str, xi: np.ndarray) -> np.ndarray:
        """Transform of ``u0`` or ``v0`` at arbitrary ``xi`` (exact profile if
        known, else linear interpolation of the grid coefficients)."""
        f, prof = (self.u0, self.u_profile) if which == "u" else (self.v0, self.v_profile)
        xi = np.asarray(xi, dtype=float)
        if prof is not None:
            return np.asarray(prof(xi), dtype=complex)
        order = np.argsort(f.grid.freqs)
        fx, fc = f.grid.freqs[order], f.coeffs[order]
        return (np.interp(xi, fx, fc.real, left=0.0, right=0.0)
                + 1j * np.interp(xi, fx, fc.imag, left=0.0, right=0.0))


def bump_profile(a: float, b: float, kind: str = "sin2") -> Callable:
    """Bump supported on ``[a, b]``: ``sin^2`` (smooth) or ``box`` (indicator)."""
    if not b > a:
        raise ArgumentError("bump needs b > a")

    def prof(xi):
        xi = np.asarray(xi, dtype=float)
        z = (xi - a) / (b - a)
        inside = (z > 0) & (z < 1)
        if kind == "box":
            return np.where((z >= 0) & (z <= 1), 1.0, 0.0)
        return np.where(inside, np.sin(np.pi * np.clip(z, 0, 1)) ** 2, 0.0)

    if kind not in ("sin2", "box"):
        raise ArgumentError(f"unknown bump kind {kind!r}")
    return prof


def separated_bumps(grid: Grid, lam: float, mu: float, width: float = 0.5,
                    kind: str = "sin2", crossing_time: float = 0.0, shift: float = 0.0,
                    phases=(0.0, 0.0)) -> SeparatedPair:
    """Bumps on ``I1 = [a, a+w]``, ``I2 = [b, b+w]`` at distances ``lam``, ``mu``.

    ``a = (lam + mu + w)/2`` and ``b = (mu - lam - w)/2``. Both waves are
    phased to focus at ``x = shift`` at time ``crossing_time``; ``phases``
    are constant phase factors.
    """
    if lam <= 0 or mu <= 0:
        raise DegenerateSeparationError("separations lam and mu must be positive")
    if width <= 0:
        raise ArgumentError("width must be positive")
    a = 0.5 * (lam + mu + width)
    b = 0.5 * (mu - lam - width)
    # the product's spectrum must fit in the band
    top = abs(a + width) + max(abs(b), abs(b + width))
    if top >= grid.nyquist:
        raise ResolutionError(f"product spectrum reaches |xi| = {top:g}; grid band "
                              f"{grid.nyquist:g} too small")

    def phased(prof, theta):
        return lambda x: prof(x) * np.exp(1j * theta - 1j * np.asarray(x) * shift
                                          - 1j * crossing_time * np.asarray(x) ** 3)

    pu = phased(bump_profile(a, a + width, kind), phases[0])
    pv = phased(bump_profile(b, b + width, kind), phases[1])
    u0 = SpectralField.from_function(grid, pu)
    v0 = SpectralField.from_function(grid, pv)
    return SeparatedPair.from_fields(u0, v0, u_profile=pu, v_profile=pv)


def bilinear_norm(u0: SpectralField, v0: SpectralField, T: float = DEFAULT_T,
                  M: int = DEFAULT_M, t0: float = 0.0) -> float:
    """``||exp(-t d^3) u0 * exp(-t d^3) v0||_{L^2_{x,t}}`` over ``[t0, t0+T]``."""
    if u0.grid != v0.grid:
        raise ArgumentError("fields must share a grid")
    grid = u0.grid
    times = _time_nodes(T, M)
    xi3 = grid.freqs ** 3
    cu = u0.coeffs * grid.parity * np.exp(1j * t0 * xi3)
    cv = v0.coeffs * grid.parity * np.exp(1j * t0 * xi3)
    step = np.exp(1j * (times[1] - times[0]) * xi3)
    vals = np.empty(times.size)
    for k in range(times.size):
        if k:
            cu *= step
            cv *= step
        a = sfft.ifft(cu) / grid.dx
        b = sfft.ifft(cv) / grid.dx
        w = a * b
        vals[k] = np.sum(w.real ** 2 + w.imag ** 2) * grid.dx
    return math.sqrt(np.trapezoid(vals, times))


def bilinear_ratio(pair: SeparatedPair, T: float = DEFAULT_T, M: int = DEFAULT_M) -> float:
    """Bilinear norm divided by ``(lam mu)^(-1/2) ||u0|| ||v0||``."""
    lam, mu = pair.lam, pair.mu
    if lam <= 0 or mu <= 0:
        raise DegenerateSeparationError(f"degenerate separation lam = {lam:g}, mu = {mu:g}")
    raw = bilinear_norm(pair.u0, pair.v0, T, M)
    return raw * math.sqrt(lam * mu) / (pair.u0.l2() * pair.v0.l2())


def bilinear_full_line_norm(pair: SeparatedPair) -> float:
    """Bilinear norm over all of ``R x R`` from
    ``(1 / 12 pi^2) int int |u^|^2 |v^|^2 / |xi1^2 - xi2^2|``."""
    g = pair.grid
    eu = np.abs(pair.u0.coeffs) ** 2
    ev = np.abs(pair.v0.coeffs) ** 2
    mu_, mv = eu > 0, ev > 0
    s = kernels.bilinear_weighted_sum(g.freqs[mu_], eu[mu_], g.freqs[mv], ev[mv])
    return math.sqrt(s * g.dxi ** 2 / (12 * math.pi ** 2))


def bilinear_decay(lams, width: float = 0.5, T: float = DEFAULT_T, M: int = DEFAULT_M,
                   length: float = 4096.0, n: int = 65536, seed: int = 0,
                   randomize: bool = False) -> RatioSweepResult:
    """Raw bilinear norms of ``separated_bumps`` with ``lam = mu`` against ``lam * mu``.

    The waves cross at ``T/2``. With ``randomize`` the crossing time,
    position and global phases are drawn per point from ``sub_rng``.
    Separations are re-measured from the sampled supports.
    """
    grid = Grid(length, n)
    prods, raws, ratios, meas = [], [], [], []
    for idx, lam in enumerate(lams):
        tc, x0, ph = 0.5 * T, 0.0, (0.0, 0.0)
        if randomize:
            rng = sub_rng(seed, idx)
            tc = rng.uniform(0.4, 0.6) * T
            x0 = rng.uniform(-0.1, 0.1) * length
            ph = tuple(rng.uniform(0, 2 * math.pi, 2))
        pair = separated_bumps(grid, lam, lam, width, crossing_time=tc, shift=x0, phases=ph)
        raw = bilinear_norm(pair.u0, pair.v0, T, M)
        prods.append(float(lam) * float(lam))
        raws.append(raw)
        ratios.append(raw * math.sqrt(pair.lam * pair.mu))
        meas.append((pair.lam, pair.mu))
    meta = {"width": width, "T": T, "M": M, "grid": (length, n), "ratios": ratios,
            "measured_separations": meas, "expected_exponent": -0.5, "seed": seed}
    return RatioSweepResult.from_measurements(prods, raws, meta)


def bilinear_spectral_oracle(pair: SeparatedPair, tau_grid, xi_grid,
                             smoothing: float | None = None, quad_step: float | None = None):
    """Space-time transform of the product of free waves, shape ``(len(xi), len(tau))``.

    Evaluates ``[u^(xi/2 - y) v^(xi/2 + y) + u^(xi/2 + y) v^(xi/2 - y)] / (6 |xi| y)``
    with ``y^2 = xi^2/4 - (xi^3 - tau)/(3 xi)``: zero when ``y^2 < 0`` and NaN
    (singular) when ``|xi|`` or ``y`` is below 1e-6. With ``smoothing = s``
    the result is averaged in ``tau`` against a unit-mass Gaussian of
    standard deviation ``s``.
    """
    xi = np.asarray(xi_grid, dtype=float)
    tau = np.asarray(tau_grid, dtype=float)
    if smoothing is None:
        return _oracle_points(pair, xi[:, None], tau[None, :])
    if not smoothing > 0:
        raise ArgumentError("smoothing must be positive")
    h = quad_step or smoothing / 16.0
    off = np.arange(-8 * smoothing, 8 * smoothing + 0.5 * h, h)
    wts = np.exp(-0.5 * (off / smoothing) ** 2)
    wts /= wts.sum()
    out = np.zeros((xi.size, tau.size), dtype=complex)
    for o, wt in zip(off, wts):
        out += wt * _oracle_points(pair, xi[:, None], tau[None, :] - o)
    return out


def _oracle_points(pair: SeparatedPair, xi: np.ndarray, tau: np.ndarray) -> np.ndarray:
    xi, tau = np.broadcast_arrays(xi, tau)
    out = np.zeros(xi.shape, dtype=complex)
    singular = np.abs(xi) < SING_EPS
    safe = np.where(singular, 1.0, xi)
    y2 = 0.25 * safe ** 2 - (safe ** 3 - tau) / (3 * safe)
    live = (~singular) & (y2 >= 0)
    y = np.sqrt(np.where(live, y2, 0.0))
    singular |= live & (y < SING_EPS)
    live &= ~singular
    xl, yl = xi[live], y[live]
    lo, hi = 0.5 * xl - yl, 0.5 * xl + yl
    val = (pair.profile_values("u", lo) * pair.profile_values("v", hi)
           + pair.profile_values("u", hi) * pair.profile_values("v", lo))
    out[live] = val / (6 * np.abs(xl) * yl)
    out[singular] = np.nan
    return out


def bilinear_direct_transform(pair: SeparatedPair, tau_grid, xi_grid, taper: float,
                              half_window: float | None = None, dt: float | None = None):
    """Direct space-time transform of the product of free waves with a
    Gaussian time taper ``exp(-t^2 / (2 taper^2))``. The taper turns the
    transform into a unit-mass Gaussian average in ``tau`` of standard
    deviation ``1 / taper``, so it is compared with the oracle at
    ``smoothing = 1 / taper``.

    Space: FFT of the sampled product (``xi_grid`` snaps to grid modes).
    Time: trapezoid over ``[-half_window, half_window]``.
    """
    grid = pair.grid
    xi = np.asarray(xi_grid, dtype=float)
    tau = np.asarray(tau_grid, dtype=float)
    modes = np.rint(xi / grid.dxi).astype(np.int64)
    if np.any(np.abs(modes) >= grid.n // 2):
        raise ResolutionError("xi lattice exceeds the grid band")
    hw = half_window or 8.0 * taper
    if dt is None:
        top = max(np.max(np.abs(tau)), 1.0)
        dt = math.pi / (4.0 * (top + 10.0 / taper))
    K = int(math.ceil(hw / dt))
    times = np.linspace(-hw, hw, 2 * K + 1)
    step = times[1] - times[0]
    xi3 = grid.freqs ** 3
    cu = pair.u0.coeffs * grid.parity * np.exp(1j * times[0] * xi3)
    cv = pair.v0.coeffs * grid.parity * np.exp(1j * times[0] * xi3)
    adv = np.exp(1j * step * xi3)
    slots = modes % grid.n
    out = np.zeros((xi.size, tau.size), dtype=complex)
    wts = np.exp(-0.5 * (times / taper) ** 2) * step
    wts[0] *= 0.5
    wts[-1] *= 0.5
    for k, t in enumerate(times):
        if k:
            cu *= adv
            cv *= adv
        prod = (sfft.ifft(cu) / grid.dx) * (sfft.ifft(cv) / grid.dx)
        fx = sfft.fft(prod)[slots] * grid.dx * grid.parity[slots]
        out += wts[k] * fx[:, None] * np.exp(-1j * tau * t)[None, :]
    return out


def oracle_relative_error(oracle: np.ndarray, direct: np.ndarray) -> float:
    """Relative L^2 difference over the non-singular lattice points."""
    ok = np.isfinite(oracle)
    den = np.linalg.norm(oracle[ok])
    if den == 0:
        raise ArgumentError("oracle vanishes on the lattice")
    return float(np.linalg.norm(oracle[ok] - direct[ok]) / den)
