"""Norms of spectral fields and space-time trajectories.

Every norm is computed from the continuum-normalized coefficients, so that
``norm(f, NormSpec.sobolev(0)) == norm(f, NormSpec.lebesgue(2))`` up to
rounding. Block norms (Besov, modulation) sum block energies with the
kernel ``box_energies`` and combine the weighted blocks in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft as sfft
from scipy.special import logsumexp

from . import kernels
from .errors import ArgumentError, UndefinedRatioError
from .spectral import Grid, SpectralField

INF = math.inf

FAMILIES = ("lebesgue", "mixed", "sobolev", "homogeneous_sobolev", "besov",
            "modulation", "fourier_lebesgue")


def _exponent(v, name) -> float:
    v = float(v)
    if math.isnan(v) or v < 1:
        raise ArgumentError(f"{name} must lie in [1, inf], got {v}")
    return v


@dataclass(frozen=True)
class NormSpec:
    """Tagged norm description; build with the class-method factories."""

    family: str
    s: float = 0.0
    p: float | None = None
    q: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown norm family {self.family!r}")
        if not math.isfinite(self.s):
            raise ArgumentError("regularity index must be finite")
        if self.p is not None:
            object.__setattr__(self, "p", _exponent(self.p, "p"))
        if self.q is not None:
            object.__setattr__(self, "q", _exponent(self.q, "q"))
        need = {"lebesgue": ("p",), "mixed": ("p", "q"), "besov": ("q",),
                "modulation": ("q",), "fourier_lebesgue": ("q",)}
        for name in need.get(self.family, ()):
            if getattr(self, name) is None:
                raise ArgumentError(f"{self.family} norm needs {name}")

    @classmethod
    def lebesgue(cls, p) -> "NormSpec":
        return cls("lebesgue", p=p)

    @classmethod
    def mixed(cls, p_time, q_space) -> "NormSpec":
        return cls("mixed", p=p_time, q=q_space)

    @classmethod
    def sobolev(cls, s) -> "NormSpec":
        return cls("sobolev", s=s)

    @classmethod
    def homogeneous_sobolev(cls, s) -> "NormSpec":
        return cls("homogeneous_sobolev", s=s)

    @classmethod
    def besov(cls, s, q) -> "NormSpec":
        return cls("besov", s=s, q=q)

    @classmethod
    def modulation(cls, s, q) -> "NormSpec":
        return cls("modulation", s=s, q=q)

    @classmethod
    def fourier_lebesgue(cls, s, q) -> "NormSpec":
        return cls("fourier_lebesgue", s=s, q=q)

    def label(self) -> str:
        args = {"lebesgue": (self.p,), "mixed": (self.p, self.q),
                "sobolev": (self.s,), "homogeneous_sobolev": (self.s,)}
        vals = args.get(self.family, (self.s, self.q))
        return f"{self.family}({', '.join(_fmt(v) for v in vals)})"


def _fmt(v) -> str:
    return "inf" if v == INF else f"{v:g}"


# ---------------------------------------------------------------- helpers

def _energy(c: np.ndarray) -> np.ndarray:
    return c.real ** 2 + c.imag ** 2


def _lq_log(log_terms: np.ndarray, q: float) -> float:
    """``(sum exp(q*t))^(1/q)`` for log-terms ``t``; ``max`` when q is inf."""
    if log_terms.size == 0:
        return 0.0
    if q == INF:
        return float(np.exp(np.max(log_terms)))
    return float(np.exp(logsumexp(q * log_terms) / q))


def _block_energies(c: np.ndarray, labels: np.ndarray):
    """Return ``(labels, energies)`` of the nonempty blocks."""
    live = _energy(c) > 0
    if not live.any():
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    lo = int(labels[live].min())
    hi = int(labels[live].max())
    e = kernels.box_energies(c, labels - lo, hi - lo + 1)
    k = np.arange(lo, hi + 1)
    keep = e > 0
    return k[keep], np.asarray(e)[keep]


def box_norms(f: SpectralField):
    """``(k, ||box_k f||_2)`` over the nonempty unit boxes ``[k-1/2, k+1/2)``."""
    k, e = _block_energies(f.coeffs, f.grid.box_index)
    return k, np.sqrt(e * f.grid.dxi / (2 * np.pi))


def dyadic_norms(f: SpectralField):
    """``(j, ||P_j f||_2)`` over the nonempty dyadic bands."""
    j, e = _block_energies(f.coeffs, f.grid.dyadic_index)
    return j, np.sqrt(e * f.grid.dxi / (2 * np.pi))


def lebesgue_samples(u: np.ndarray, dx: float, p: float, axis: int = -1):
    """Riemann-sum ``L^p`` norm of physical samples (exact on the torus for p=2)."""
    a = np.abs(u)
    if p == INF:
        return np.max(a, axis=axis) if a.size else 0.0
    if p == 2:
        return np.sqrt(np.sum(a * a, axis=axis) * dx)
    return (np.sum(a ** p, axis=axis) * dx) ** (1.0 / p)


# ------------------------------------------------------------------ norm

def norm(f: SpectralField, spec: NormSpec) -> float:
    """Norm of a single field. Returns ``inf`` for a homogeneous Sobolev norm
    with negative index when the zero mode is nonzero."""
    fam = spec.family
    grid = f.grid
    c = f.coeffs
    if fam == "mixed":
        raise ArgumentError("mixed norms act on trajectories; use mixed_norm")
    if f.is_zero():
        return 0.0
    w = grid.dxi / (2 * np.pi)
    xi = grid.freqs
    if fam == "lebesgue":
        return float(lebesgue_samples(f.physical(), grid.dx, spec.p))
    if fam == "sobolev":
        logw = 0.5 * spec.s * np.log1p(xi * xi)
        return float(np.sqrt(np.sum(_energy(c) * np.exp(2 * logw)) * w))
    if fam == "homogeneous_sobolev":
        e = _energy(c)
        zero = xi == 0
        if spec.s < 0 and e[zero].sum() > 0:
            return INF
        e = np.where(zero, 0.0 if spec.s != 0 else e, e)
        with np.errstate(divide="ignore"):
            logw = np.where(zero, 0.0, spec.s * np.log(np.abs(xi)))
        return float(np.sqrt(np.sum(e * np.exp(2 * logw)) * w))
    if fam == "fourier_lebesgue":
        a = np.abs(c)
        live = a > 0
        lt = 0.5 * spec.s * np.log1p(xi[live] ** 2) + np.log(a[live])
        lt = lt + (0.0 if spec.q == INF else np.log(grid.dxi) / spec.q)
        return _lq_log(lt, spec.q)
    if fam == "modulation":
        k, b = box_norms(f)
        lt = 0.5 * spec.s * np.log1p(k.astype(float) ** 2) + np.log(b)
        return _lq_log(lt, spec.q)
    if fam == "besov":
        j, b = dyadic_norms(f)
        lt = spec.s * np.log(2.0) * j + np.log(b)
        return _lq_log(lt, spec.q)
    raise ArgumentError(f"unhandled norm family {fam!r}")  # pragma: no cover


def embedding_ratio(f: SpectralField, outer: NormSpec, inner: NormSpec) -> float:
    """``norm(f, outer) / norm(f, inner)``."""
    den = norm(f, inner)
    if den == 0:
        raise UndefinedRatioError(f"{inner.label()} norm of the field is zero")
    return norm(f, outer) / den


# ------------------------------------------------------------ trajectory

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly time-sampled fields on one grid; row ``k`` of ``coeffs``
    holds the field at ``times[k]``."""

    grid: Grid
    times: np.ndarray
    coeffs: np.ndarray = dc_field(repr=False)
    real: bool = False

    def __post_init__(self):
        t = np.array(self.times, dtype=float).reshape(-1)
        c = np.array(self.coeffs, dtype=complex)
        if t.size == 0:
            raise ArgumentError("trajectory needs at least one time")
        if c.shape != (t.size, self.grid.n):
            raise ArgumentError(f"coeffs shape {c.shape} != ({t.size}, {self.grid.n})")
        if t.size > 1:
            d = np.diff(t)
            if np.any(d <= 0):
                raise ArgumentError("times must be strictly increasing")
            if np.max(np.abs(d - d.mean())) > 1e-9 * max(d.mean(), abs(t[-1])):
                raise ArgumentError("times must be uniformly spaced")
        t.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "real", bool(self.real))

    @classmethod
    def from_fields(cls, times, fields) -> "Trajectory":
        fields = list(fields)
        if not fields:
            raise ArgumentError("trajectory needs at least one field")
        grid = fields[0].grid
        if any(f.grid != grid for f in fields):
            raise ArgumentError("all fields must share one grid")
        return cls(grid, times, np.stack([f.coeffs for f in fields]),
                   all(f.real for f in fields))

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, k: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[k], self.real)

    @property
    def fields(self) -> list[SpectralField]:
        return [self[k] for k in range(len(self))]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def index_of(self, t: float, rtol: float = 1e-9) -> int:
        """Sample index of time ``t``; ArgumentError if ``t`` is not a sample."""
        k = int(np.argmin(np.abs(self.times - t)))
        scale = max(abs(self.times[-1] - self.times[0]), 1.0)
        if abs(self.times[k] - t) > rtol * scale:
            raise ArgumentError(
                f"t={t} is not a sample time in [{self.times[0]}, {self.times[-1]}]")
        return k

    def physical(self) -> np.ndarray:
        """Physical samples, shape ``(times, n)``."""
        u = sfft.ifft(self.coeffs * self.grid.parity, axis=1) / self.grid.dx
        return u.real if self.real else u


def time_integral(vals: np.ndarray, times: np.ndarray, p: float) -> float:
    """``(int |g|^p dt)^(1/p)`` by composite trapezoid; max for p=inf."""
    vals = np.asarray(vals, dtype=float)
    if p == INF:
        return float(np.max(vals))
    if vals.size < 2:
        raise ArgumentError("a finite time exponent needs at least 2 samples")
    return float(np.trapezoid(vals ** p, times) ** (1.0 / p))


def mixed_norm(tr: Trajectory, p_time, q_space) -> float:
    """``L^p_t L^q_x`` norm over the trajectory's time span."""
    p = _exponent(p_time, "p_time")
    q = _exponent(q_space, "q_space")
    if p != INF and len(tr) < 2:
        raise ArgumentError("a finite time exponent needs at least 2 samples")
    if not np.any(tr.coeffs):
        return 0.0
    if q == 2:
        g = np.sqrt(np.sum(_energy(tr.coeffs), axis=1) * tr.grid.dxi / (2 * np.pi))
    else:
        g = lebesgue_samples(tr.physical(), tr.grid.dx, q, axis=1)
    return time_integral(g, tr.times, p)
