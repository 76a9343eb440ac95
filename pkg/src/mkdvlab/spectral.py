"""Periodic spectral representation of functions on a large torus.

The real line is approximated by the torus ``[-L/2, L/2)``. A function is
stored through its Fourier coefficients with the continuum normalization

    f_hat(xi) = integral exp(-i xi x) f(x) dx,

approximated by the discrete transform scaled by ``dx``. With this
convention Plancherel reads ``||f||_2^2 = (2 pi)^-1 integral |f_hat|^2``
and ``(f g)^ = (2 pi)^-1 f_hat * g_hat``, so continuum formulas carry over
with the frequency integrals replaced by sums weighted by ``dxi``.

Coefficient arrays are kept in FFT order (``j = 0, 1, ..., n/2-1, -n/2,
..., -1``); ``Grid.index`` gives the integer mode number of each slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.fft as sfft

from .errors import ArgumentError, NumericError

Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, complex, float]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of ``n`` points on a torus of length ``length``.

    Frequencies are ``xi_j = 2 pi j / L`` for ``j in [-n/2, n/2)``.
    """

    length: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.length) and self.length > 0):
            raise ArgumentError(f"grid length must be positive, got {self.length}")
        n = int(self.n)
        if n != self.n or n < 2 or n & (n - 1):
            raise ArgumentError(f"grid size must be a power of two, got {self.n}")
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "n", n)

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dxi(self) -> float:
        """Frequency spacing ``2 pi / L``."""
        return 2.0 * np.pi / self.length

    @property
    def nyquist(self) -> float:
        """Largest representable |xi| (the unpaired mode sits at ``-nyquist``)."""
        return np.pi * self.n / self.length

    @cached_property
    def index(self) -> np.ndarray:
        return np.rint(sfft.fftfreq(self.n, 1.0 / self.n)).astype(np.int64)

    @cached_property
    def freqs(self) -> np.ndarray:
        return self.index * self.dxi

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @cached_property
    def parity(self) -> np.ndarray:
        # exp(-i xi_j (-L/2)) = (-1)^j: accounts for the grid starting at -L/2
        return np.where(self.index % 2 == 0, 1.0, -1.0)

    @cached_property
    def neg(self) -> np.ndarray:
        """Permutation taking the slot of mode ``j`` to the slot of ``-j``."""
        return (-np.arange(self.n)) % self.n

    @cached_property
    def box_index(self) -> np.ndarray:
        """Unit-box label ``k`` with ``xi in [k - 1/2, k + 1/2)``."""
        return np.floor(self.freqs + 0.5).astype(np.int64)

    @cached_property
    def dyadic_index(self) -> np.ndarray:
        """Dyadic label ``j``: ``|xi| in [2^(j-1), 2^j)``, ``j = 0`` for ``|xi| < 1``."""
        a = np.abs(self.freqs)
        _, e = np.frexp(a)
        return np.where(a < 1.0, 0, e).astype(np.int64)

    def mode(self, xi: float) -> int:
        """Integer mode number nearest to frequency ``xi``."""
        return int(np.rint(xi / self.dxi))

    def slot(self, j) -> np.ndarray:
        """Array slot(s) holding mode number(s) ``j``."""
        return np.asarray(j, dtype=np.int64) % self.n

    def with_n(self, n: int) -> "Grid":
        return Grid(self.length, n)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A function on ``grid`` held as continuum-normalized Fourier coefficients.

    ``real`` records that the represented function is real valued, i.e.
    the coefficients are conjugate symmetric. Fields are immutable.
    """

    grid: Grid
    coeffs: np.ndarray = dc_field(repr=False)
    real: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n,):
            raise ArgumentError(
                f"expected {self.grid.n} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "real", bool(self.real))

    @classmethod
    def zeros(cls, grid: Grid, real: bool = True) -> "SpectralField":
        return cls(grid, np.zeros(grid.n, dtype=complex), real)

    @classmethod
    def from_function(cls, grid: Grid, fhat: Callable[[np.ndarray], np.ndarray],
                      real: bool = False) -> "SpectralField":
        """Sample a spectral profile ``fhat(xi)`` on the grid frequencies."""
        vals = np.broadcast_to(np.asarray(fhat(grid.freqs), dtype=complex), (grid.n,))
        return cls(grid, vals, real)

    def physical(self) -> np.ndarray:
        """Samples at ``grid.x`` (real array for real fields)."""
        u = sfft.ifft(self.coeffs * self.grid.parity) / self.grid.dx
        return u.real if self.real else u

    def l2(self) -> float:
        c = self.coeffs
        return float(np.sqrt(np.sum(c.real ** 2 + c.imag ** 2) * self.grid.dxi / (2 * np.pi)))

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def conjugate_symmetry_error(self) -> float:
        """Relative deviation from ``c(-j) = conj(c(j))`` (Nyquist slot excluded)."""
        c = self.coeffs.copy()
        c[self.grid.n // 2] = 0.0
        scale = np.max(np.abs(c))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(c[self.grid.neg] - np.conj(c))) / scale)

    def symmetrized(self) -> "SpectralField":
        """Projection onto real functions (Nyquist slot zeroed)."""
        return SpectralField(self.grid, realify(self.coeffs, self.grid), True)

    def support(self, rel_tol: float = 0.0) -> np.ndarray:
        """Sorted frequencies whose coefficient exceeds ``rel_tol * max``."""
        a = np.abs(self.coeffs)
        thr = rel_tol * a.max() if a.size else 0.0
        return np.sort(self.grid.freqs[a > thr])

    def _check(self, other: "SpectralField"):
        if other.grid != self.grid:
            raise ArgumentError("fields live on different grids")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs, self.real and other.real)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs, self.real and other.real)

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs, self.real)

    def __mul__(self, scalar) -> "SpectralField":
        if isinstance(scalar, SpectralField):
            return NotImplemented
        real = self.real and np.isreal(scalar)
        return SpectralField(self.grid, self.coeffs * scalar, real)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "SpectralField":
        return self * (1.0 / scalar)


def realify(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Average ``c`` with its conjugate reflection; zero the unpaired mode."""
    out = 0.5 * (c + np.conj(c[grid.neg]))
    out[grid.n // 2] = 0.0
    return out


@dataclass(frozen=True)
class FrequencyWindow:
    """A frequency-domain window: unit box, dyadic band or half-open interval.

    * ``unit_box(k)``: ``xi in [k - 1/2, k + 1/2)``
    * ``dyadic(j)``: ``|xi| in [2^(j-1), 2^j)`` for ``j >= 1``, ``|xi| < 1`` for ``j = 0``
    * ``interval(a, b)``: ``xi in [a, b)``
    """

    kind: str
    k: int = 0
    j: int = 0
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in ("unit-box", "dyadic-band", "interval"):
            raise ArgumentError(f"unknown window kind {self.kind!r}")
        if self.kind == "dyadic-band" and self.j < 0:
            raise ArgumentError("dyadic band index must be >= 0")
        if self.kind == "interval" and not self.a <= self.b:
            raise ArgumentError("interval requires a <= b")

    @classmethod
    def unit_box(cls, k: int) -> "FrequencyWindow":
        return cls("unit-box", k=int(k))

    @classmethod
    def dyadic(cls, j: int) -> "FrequencyWindow":
        return cls("dyadic-band", j=int(j))

    @classmethod
    def interval(cls, a: float, b: float) -> "FrequencyWindow":
        return cls("interval", a=float(a), b=float(b))

    def mask(self, grid: Grid) -> np.ndarray:
        if self.kind == "unit-box":
            return grid.box_index == self.k
        if self.kind == "dyadic-band":
            return grid.dyadic_index == self.j
        xi = grid.freqs
        return (xi >= self.a) & (xi < self.b)


def to_spectral(samples, grid: Grid) -> SpectralField:
    """Continuum-normalized Fourier coefficients of samples taken at ``grid.x``."""
    samples = np.asarray(samples)
    if samples.shape != (grid.n,):
        raise ArgumentError(
            f"expected {grid.n} samples, got array of shape {samples.shape}")
    real = np.isrealobj(samples)
    c = sfft.fft(samples) * (grid.dx * grid.parity)
    return SpectralField(grid, c, real)


def _multiplier_values(m: Multiplier, grid: Grid) -> np.ndarray:
    vals = m(grid.freqs) if callable(m) else m
    vals = np.broadcast_to(np.asarray(vals, dtype=complex), (grid.n,))
    if not np.all(np.isfinite(vals)):
        raise NumericError("multiplier is not finite on every grid frequency")
    return vals


def apply_multiplier(f: SpectralField, m: Multiplier) -> SpectralField:
    """Multiply coefficient ``j`` by ``m(xi_j)``.

    The real flag survives iff ``m(-xi) = conj(m(xi))`` on every mode where
    ``f`` (or its reflection) is nonzero.
    """
    grid = f.grid
    vals = _multiplier_values(m, grid)
    out = f.coeffs * vals
    real = False
    if f.real:
        neg = grid.neg
        scale = max(np.max(np.abs(vals)), 1e-300)
        bad = np.abs(vals[neg] - np.conj(vals)) > 1e-12 * scale
        live = (f.coeffs != 0) | (f.coeffs[neg] != 0)
        live[grid.n // 2] = False
        real = not np.any(bad & live)
        if real:
            out[grid.n // 2] = 0.0
    return SpectralField(grid, out, real)


def project(f: SpectralField, w: FrequencyWindow) -> SpectralField:
    """Zero every coefficient outside the window."""
    mask = w.mask(f.grid)
    out = np.where(mask, f.coeffs, 0.0)
    real = False
    if f.real:
        neg = f.grid.neg
        live = (f.coeffs != 0)
        live[f.grid.n // 2] = False
        real = not np.any((mask != mask[neg]) & live)
        if real:
            out[f.grid.n // 2] = 0.0
    return SpectralField(f.grid, out, real)


def cube_coeffs(c: np.ndarray, grid: Grid, real: bool) -> np.ndarray:
    """Coefficients of ``u^3`` for ``u`` with coefficients ``c`` (see :func:`dealiased_product`)."""
    return product_coeffs(c, c, c, grid, real)


def product_coeffs(cf: np.ndarray, cg: np.ndarray, ch: np.ndarray, grid: Grid,
                   real: bool) -> np.ndarray:
    n = grid.n
    half = n // 2
    big_n = 2 * n
    scale = big_n / grid.length
    out = np.zeros(n, dtype=complex)
    if real:
        phys = []
        for c in (cf,) if (cf is cg and cg is ch) else (cf, cg, ch):
            r = np.zeros(big_n // 2 + 1, dtype=complex)
            r[:half] = c[:half]
            r[half] = 0.5 * c[half]
            phys.append(sfft.irfft(r, n=big_n) * scale)
        prod = phys[0] ** 3 if len(phys) == 1 else phys[0] * phys[1] * phys[2]
        r = sfft.rfft(prod) / scale
        out[:half] = r[:half]
        out[half + 1:] = np.conj(r[1:half][::-1])
        return out
    phys = []
    for c in (cf, cg, ch):
        b = np.zeros(big_n, dtype=complex)
        b[:half] = c[:half]
        b[-half:] = c[half:]
        phys.append(sfft.ifft(b) * scale)
    b = sfft.fft(phys[0] * phys[1] * phys[2]) / scale
    out[:half] = b[:half]
    out[half + 1:] = b[-half + 1:]
    return out


def dealiased_product(f: SpectralField, g: SpectralField, h: SpectralField) -> SpectralField:
    """Coefficients of the pointwise product ``f g h``.

    The product is formed on a grid padded to ``2n`` points, which is free
    of aliasing for cubic products of any fields on the grid; modes of the
    product beyond the grid band (and the unpaired Nyquist mode) are
    discarded.
    """
    if not (f.grid == g.grid == h.grid):
        raise ArgumentError("dealiased_product requires fields on the same grid")
    real = f.real and g.real and h.real
    return SpectralField(f.grid, product_coeffs(f.coeffs, g.coeffs, h.coeffs, f.grid, real), real)
