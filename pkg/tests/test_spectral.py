import numpy as np
import pytest
from hypothesis import given, strategies as st

from mkdvlab.errors import ArgumentError, NumericError
from mkdvlab.spectral import (FrequencyWindow, Grid, SpectralField, apply_multiplier,
                              dealiased_product, project, to_spectral)

from conftest import random_bandlimited


# ---- Grid

def test_grid_basic_invariants():
    g = Grid(100.0, 256)
    assert g.dx * g.n == pytest.approx(100.0)
    assert g.freqs.min() == pytest.approx(-np.pi * 256 / 100)
    pos = np.sort(g.freqs[g.freqs > 0])
    neg = np.sort(-g.freqs[(g.freqs < 0) & (g.index != -128)])
    assert np.allclose(pos, neg)
    assert g.x[0] == -50.0


@pytest.mark.parametrize("n", [0, 3, 100, 257])
def test_grid_rejects_non_power_of_two(n):
    with pytest.raises(ArgumentError):
        Grid(10.0, n)


def test_grid_rejects_bad_length():
    with pytest.raises(ArgumentError):
        Grid(-1.0, 16)


def test_box_and_dyadic_labels():
    g = Grid(2 * np.pi * 8, 256)          # spacing 1/8
    xi = g.freqs
    assert np.all((xi >= g.box_index - 0.5) & (xi < g.box_index + 0.5))
    j = g.dyadic_index
    a = np.abs(xi)
    assert np.all(a[j == 0] < 1)
    hi = j > 0
    assert np.all((a[hi] >= 2.0 ** (j[hi] - 1)) & (a[hi] < 2.0 ** j[hi]))


# ---- to_spectral

def test_constant_has_only_dc(grid):
    f = to_spectral(np.ones(grid.n), grid)
    assert f.real
    assert f.coeffs[0] == pytest.approx(grid.length)
    assert np.max(np.abs(f.coeffs[1:])) < 1e-12 * grid.length


def test_cosine_pair(grid):
    f = to_spectral(np.cos(2 * np.pi * grid.x / grid.length), grid)
    assert f.coeffs[1] == pytest.approx(grid.length / 2)
    assert f.coeffs[-1] == pytest.approx(grid.length / 2)
    rest = np.delete(f.coeffs, [1, grid.n - 1])
    assert np.max(np.abs(rest)) < 1e-12 * grid.length


def test_round_trip(grid, rng):
    u = rng.standard_normal(grid.n)
    f = to_spectral(u, grid)
    assert np.max(np.abs(f.physical() - u)) < 1e-12 * np.max(np.abs(u))
    z = u + 1j * rng.standard_normal(grid.n)
    h = to_spectral(z, grid)
    assert not h.real
    assert np.max(np.abs(h.physical() - z)) < 1e-12 * np.max(np.abs(z))


def test_length_mismatch(grid):
    with pytest.raises(ArgumentError):
        to_spectral(np.zeros(grid.n + 1), grid)


def test_real_field_conjugate_symmetric(grid, rng):
    f = to_spectral(rng.standard_normal(grid.n), grid)
    assert f.conjugate_symmetry_error() < 1e-12


def test_coeffs_read_only(grid):
    f = SpectralField.zeros(grid)
    with pytest.raises(ValueError):
        f.coeffs[0] = 1.0


@given(st.integers(0, 2 ** 32 - 1))
def test_parseval(seed):
    g = Grid(64.0, 256)
    r = np.random.default_rng(seed)
    u = r.standard_normal(g.n) + 1j * r.standard_normal(g.n)
    f = to_spectral(u, g)
    phys = np.sum(np.abs(u) ** 2) * g.dx
    spec = np.sum(np.abs(f.coeffs) ** 2) * g.dxi / (2 * np.pi)
    assert abs(phys - spec) < 1e-12 * phys
    assert f.l2() ** 2 == pytest.approx(phys, rel=1e-12)


# ---- apply_multiplier

def test_identity_multiplier(grid, rng):
    f = random_bandlimited(grid, 10, rng)
    g = apply_multiplier(f, lambda xi: np.ones_like(xi))
    assert np.array_equal(g.coeffs, f.coeffs)
    assert g.real


def test_derivative_of_cosine(grid):
    k = 2 * np.pi / grid.length
    f = to_spectral(np.cos(k * grid.x), grid)
    d = apply_multiplier(f, lambda xi: 1j * xi)
    assert d.real
    assert np.max(np.abs(d.physical() + k * np.sin(k * grid.x))) < 1e-12


def test_multiplier_semigroup(grid, rng):
    f = random_bandlimited(grid, 20, rng)
    twice = apply_multiplier(apply_multiplier(f, lambda x: np.abs(x) ** 0.125),
                             lambda x: np.abs(x) ** 0.125)
    once = apply_multiplier(f, lambda x: np.abs(x) ** 0.25)
    assert np.max(np.abs(twice.coeffs - once.coeffs)) < 1e-12 * np.max(np.abs(once.coeffs))


def test_multiplier_array_form(grid, rng):
    f = random_bandlimited(grid, 20, rng)
    m = np.exp(0.1j * grid.freqs ** 3)
    assert np.allclose(apply_multiplier(f, m).coeffs, f.coeffs * m)


def test_nonfinite_multiplier(grid, rng):
    f = random_bandlimited(grid, 20, rng)
    with pytest.raises(NumericError), np.errstate(divide="ignore"):
        apply_multiplier(f, lambda xi: 1.0 / xi)


def test_real_flag_dropped_for_one_sided_multiplier(grid, rng):
    f = random_bandlimited(grid, 20, rng)
    g = apply_multiplier(f, lambda xi: (xi > 0).astype(float))
    assert not g.real


# ---- project

def test_unit_box_contains_support():
    g = Grid(2 * np.pi * 20, 512)
    xi = g.freqs
    f = SpectralField(g, ((xi >= 4.6) & (xi < 5.4)).astype(complex))
    p = project(f, FrequencyWindow.unit_box(5))
    assert np.array_equal(p.coeffs, f.coeffs)


def test_disjoint_projections_vanish(grid, rng):
    f = random_bandlimited(grid, 20, rng)
    p = project(project(f, FrequencyWindow.unit_box(3)), FrequencyWindow.unit_box(4))
    assert p.is_zero()


def test_projection_idempotent(grid, rng):
    f = random_bandlimited(grid, 20, rng)
    w = FrequencyWindow.dyadic(3)
    once = project(f, w)
    assert np.array_equal(project(once, w).coeffs, once.coeffs)


@pytest.mark.parametrize("kind", ["box", "dyadic"])
def test_tiling_reconstructs(grid, rng, kind):
    f = random_bandlimited(grid, 20, rng)
    total = np.zeros(grid.n, dtype=complex)
    if kind == "box":
        windows = [FrequencyWindow.unit_box(k) for k in range(-26, 27)]
    else:
        windows = [FrequencyWindow.dyadic(j) for j in range(0, 7)]
    for w in windows:
        total += project(f, w).coeffs
    assert np.max(np.abs(total - f.coeffs)) < 1e-12 * np.max(np.abs(f.coeffs))


def test_boxes_do_not_overlap():
    g = Grid(2 * np.pi * 4, 256)   # spacing 1/4: box edges land on grid points
    count = sum(FrequencyWindow.unit_box(k).mask(g).astype(int) for k in range(-33, 34))
    assert np.all(count == 1)


def test_symmetric_projection_keeps_real_flag(grid, rng):
    f = random_bandlimited(grid, 20, rng)
    assert project(f, FrequencyWindow.dyadic(2)).real
    assert not project(f, FrequencyWindow.unit_box(2)).real


def test_window_validation():
    with pytest.raises(ArgumentError):
        FrequencyWindow.dyadic(-1)
    with pytest.raises(ArgumentError):
        FrequencyWindow.interval(2.0, 1.0)


# ---- dealiased_product

def test_product_of_constants(grid):
    c = to_spectral(np.full(grid.n, 1.5), grid)
    p = dealiased_product(c, c, c)
    assert np.allclose(p.physical(), 1.5 ** 3, atol=1e-12)


def test_single_modes_add_frequencies():
    g = Grid(2 * np.pi * 16, 512)
    modes = (7, 30, -12)
    fields = [SpectralField(g, np.where(g.index == m, 1.0, 0.0).astype(complex))
              for m in modes]
    p = dealiased_product(*fields)
    live = np.nonzero(np.abs(p.coeffs) > 1e-12 * np.abs(p.coeffs).max())[0]
    assert list(g.index[live]) == [sum(modes)]


def _fine_grid_product(f, g_, h):
    grid = f.grid
    fine = Grid(grid.length, 2 * grid.n)
    vals = []
    for a in (f, g_, h):
        c = np.zeros(fine.n, dtype=complex)
        c[grid.index % fine.n] = a.coeffs
        vals.append(SpectralField(fine, c).physical())
    prod = to_spectral(vals[0] * vals[1] * vals[2], fine).coeffs
    return prod[grid.index % fine.n]


@pytest.mark.parametrize("real", [True, False])
def test_product_matches_fine_grid_oracle(rng, real):
    g = Grid(64.0, 512)
    band = 0.25 * g.nyquist
    f, gg, h = (random_bandlimited(g, band, rng, real) for _ in range(3))
    got = dealiased_product(f, gg, h).coeffs
    want = _fine_grid_product(f, gg, h)
    assert np.linalg.norm(got - want) < 1e-10 * np.linalg.norm(want)


def test_cube_shortcut_matches_general_product(grid, rng):
    f = random_bandlimited(grid, 20, rng)
    g = random_bandlimited(grid, 20, rng)
    for args in ((f, f, f), (f, f, g)):
        got = dealiased_product(*args).coeffs
        want = _fine_grid_product(*args)
        # the unpaired Nyquist mode is dropped by convention
        assert got[grid.n // 2] == 0
        got, want = np.delete(got, grid.n // 2), np.delete(want, grid.n // 2)
        assert np.linalg.norm(got - want) < 1e-10 * np.linalg.norm(want)


def test_full_band_inputs_are_alias_free(rng):
    g = Grid(32.0, 64)
    f = random_bandlimited(g, g.nyquist, rng)
    # exact reference: direct triple convolution of the coefficients
    idx = g.index
    c = dict(zip(idx, f.coeffs))
    want = np.zeros(g.n, dtype=complex)
    keys = [k for k in idx if k != -g.n // 2]
    for a in keys:
        for b in keys:
            for d in keys:
                s = a + b + d
                if abs(s) < g.n // 2:
                    want[s % g.n] += c[a] * c[b] * c[d]
    want *= (g.dxi / (2 * np.pi)) ** 2
    got = dealiased_product(f, f, f).coeffs
    assert np.linalg.norm(got - want) < 1e-11 * np.linalg.norm(want)


def test_product_grid_mismatch():
    a = SpectralField.zeros(Grid(10.0, 64))
    b = SpectralField.zeros(Grid(20.0, 64))
    with pytest.raises(ArgumentError):
        dealiased_product(a, a, b)


def test_field_arithmetic(grid, rng):
    f = random_bandlimited(grid, 10, rng)
    g = random_bandlimited(grid, 10, rng)
    assert np.allclose((f + g - g).coeffs, f.coeffs)
    assert (f * 2.0).real and not (f * 1j).real
    assert np.allclose((-f).coeffs, -f.coeffs)
    assert np.allclose((f / 4).coeffs, f.coeffs / 4)
