import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mkdvlab.errors import ArgumentError, DegenerateSeparationError, ResolutionError
from mkdvlab.estimates import (RatioSweepResult, SeparatedPair, bilinear_decay,
                               bilinear_direct_transform, bilinear_full_line_norm, bilinear_norm,
                               bilinear_ratio, bilinear_spectral_oracle, check_admissible,
                               dyadic_grid, dyadic_packet_family, fit_power_law, free_l4_norm,
                               oracle_relative_error, resonance, resonance_identity_check,
                               separated_bumps, strichartz_dyadic_decay, strichartz_ratio, sub_rng)
from mkdvlab.flows import airy_propagate
from mkdvlab.norms import INF, NormSpec, Trajectory, mixed_norm
from mkdvlab.spectral import Grid, SpectralField

finite = st.floats(-100, 100, allow_nan=False)


# ---- resonance

def test_resonance_examples():
    assert resonance(3, 1, 1) == -24
    assert resonance(2.5, 2.5, -7.0) == 0
    assert resonance(4.0, 1.5, -1.5) == 0


@given(finite, finite, finite)
def test_resonance_symmetric(xi, a, b):
    assert resonance(xi, a, b) == resonance(xi, b, a)


def test_identity_examples():
    assert resonance_identity_check(1, 2, 3) == 0
    for a, b in [(1.5, 7.0), (-3.0, 0.25), (40.0, -11.0)]:
        assert resonance_identity_check(a, -a, b) == 0


def test_identity_random_triples():
    r = np.random.default_rng(0)
    x = r.uniform(-100, 100, (3, 10_000))
    assert np.max(resonance_identity_check(*x, relative=True)) < 1e-6


@given(finite, finite, finite)
def test_identity_any_input(a, b, c):
    assert resonance_identity_check(a, b, c, relative=True) <= 1e-6


def test_resonance_is_cube_defect():
    r = np.random.default_rng(1)
    xi1, xi2, xi3 = r.uniform(-5, 5, (3, 100))
    xi = xi1 + xi2 + xi3
    want = xi1 ** 3 + xi2 ** 3 + xi3 ** 3 - xi ** 3
    assert np.allclose(resonance(xi, xi1, xi2), want, rtol=1e-12, atol=1e-10)


# ---- power-law fits

def test_fit_exact_power_law():
    x = np.array([2.0, 4, 8, 16, 32])
    e, r = fit_power_law(x, x ** -0.5)
    assert e == pytest.approx(-0.5, abs=1e-12) and r < 1e-12
    e, r = fit_power_law(x, np.full(5, 3.0))
    assert e == pytest.approx(0.0, abs=1e-12)


def test_fit_with_noise():
    r = np.random.default_rng(5)
    x = 2.0 ** np.arange(3, 11)
    y = x ** -0.125 * (1 + 0.01 * r.standard_normal(8))
    e, _ = fit_power_law(x, y)
    assert abs(e + 0.125) < 0.02


def test_fit_rejects_bad_input():
    with pytest.raises(ArgumentError):
        fit_power_law([1, 2, 3], [1, 0, 1])
    with pytest.raises(ArgumentError):
        fit_power_law([1, 2], [1, 2])


def test_sweep_result_validation():
    res = RatioSweepResult.from_measurements([1, 2, 4], [1, 0.5, 0.25])
    assert res.fitted_exponent == pytest.approx(-1)
    short = RatioSweepResult.from_measurements([1, 2], [1, 0.5])
    assert math.isnan(short.fitted_exponent)
    with pytest.raises(ArgumentError):
        RatioSweepResult.from_measurements([1, 1, 2], [1, 1, 1])


def test_sub_rng_deterministic():
    a = sub_rng(7, 3).standard_normal(4)
    assert np.array_equal(a, sub_rng(7, 3).standard_normal(4))
    assert not np.array_equal(a, sub_rng(7, 4).standard_normal(4))


# ---- Strichartz

def test_admissibility_gate():
    for p, q in [(8, 4), (4, INF), (INF, 2), (12, 3)]:
        check_admissible(p, q)
    with pytest.raises(ArgumentError, match="2/p"):
        check_admissible(8, 3)
    with pytest.raises(ArgumentError, match="p >= 4"):
        check_admissible(2, INF)
    with pytest.raises(ArgumentError, match="q >= 2"):
        check_admissible(INF, 1.5)


def test_strichartz_rejects_zero_and_inadmissible():
    g = Grid(64.0, 256)
    with pytest.raises(ArgumentError):
        strichartz_ratio(SpectralField.zeros(g), 8, 4)
    f = SpectralField(g, (np.abs(g.freqs) < 3).astype(complex))
    with pytest.raises(ArgumentError):
        strichartz_ratio(f, 8, 3)


def _random_unit(g, band, r):
    c = (r.standard_normal(g.n) + 1j * r.standard_normal(g.n)) * (np.abs(g.freqs) < band)
    f = SpectralField(g, c)
    return f / f.l2()


def test_strichartz_ratio_matches_mixed_norm():
    g = Grid(64.0, 256)
    f = _random_unit(g, 8, np.random.default_rng(2))
    times = np.linspace(0, 1, 65)
    d = SpectralField(g, f.coeffs * np.abs(g.freqs) ** 0.125)
    tr = Trajectory.from_fields(times, [airy_propagate(d, t) for t in times])
    assert strichartz_ratio(f, 8, 4, M=64) == pytest.approx(mixed_norm(tr, 8, 4), rel=1e-10)


def test_strichartz_constant_bounded_and_stable():
    # regression: max over 100 and over 200 fields was 0.3788
    g = Grid(256.0, 4096)
    r = np.random.default_rng(7)
    vals = [strichartz_ratio(_random_unit(g, 16, r), 8, 4) for _ in range(200)]
    m100, m200 = max(vals[:100]), max(vals)
    assert m200 <= 1.1 * m100
    assert m200 < 0.5


def test_dyadic_single_band_is_plain_ratio():
    res = strichartz_dyadic_decay([1], count=3, seed=4, M=64)
    grid = dyadic_grid(1)
    fam = dyadic_packet_family(grid, 1, 3, sub_rng(4, 0))
    # no |D|^(1/8) weight in the dyadic sweep: on the unit band it is O(1)
    unweighted = []
    for row in fam:
        f = SpectralField(grid, row)
        times = np.linspace(0, 1, 65)
        tr = Trajectory.from_fields(times, [airy_propagate(f, t) for t in times])
        unweighted.append(mixed_norm(tr, 8, 4))
    assert res.measured[0] == pytest.approx(max(unweighted), rel=1e-10)


def test_packet_family_is_unit_and_in_band():
    grid = dyadic_grid(64)
    fam = dyadic_packet_family(grid, 64, 5, sub_rng(0, 0))
    a = np.abs(grid.freqs)
    assert np.all(fam[:, (a < 32) | (a >= 64)] == 0)
    l2 = np.sqrt(np.sum(np.abs(fam) ** 2, axis=1) * grid.dxi / (2 * np.pi))
    assert np.allclose(l2, 1, rtol=1e-12)


def test_dyadic_decay_rejects():
    with pytest.raises(ArgumentError):
        strichartz_dyadic_decay([8, 12, 16])
    with pytest.raises(ResolutionError):
        strichartz_dyadic_decay([8, 16, 1 << 20], max_n=1 << 12)


def test_dyadic_decay_short_sweep():
    res = strichartz_dyadic_decay([8, 16, 32, 64], count=5, seed=1)
    assert res.metadata["expected_exponent"] == -0.125
    assert abs(res.fitted_exponent + 0.125) < 0.05
    assert res.metadata["under_resolved"] == []


def test_dyadic_decay_deterministic():
    a = strichartz_dyadic_decay([8, 16, 32], count=3, seed=9, M=64)
    b = strichartz_dyadic_decay([8, 16, 32], count=3, seed=9, M=64)
    assert np.array_equal(a.measured, b.measured)


def test_free_l4_norm_of_static_mode():
    g = Grid(2 * np.pi, 16)
    f = SpectralField(g, np.where(g.index == 0, 2 * np.pi, 0).astype(complex))
    # u = 1 on a torus of length 2 pi for t in [0, 1]
    assert free_l4_norm(f, T=1.0, M=8) == pytest.approx((2 * np.pi) ** 0.25, rel=1e-12)


# ---- bilinear

BIL_GRID = Grid(1024.0, 8192)


def test_separated_pair_distances():
    p = separated_bumps(BIL_GRID, 6.0, 10.0, width=0.5)
    assert p.lam == pytest.approx(6.0, abs=2 * BIL_GRID.dxi)
    assert p.mu == pytest.approx(10.0, abs=2 * BIL_GRID.dxi)
    assert p.u0.l2() == pytest.approx(1) and p.v0.l2() == pytest.approx(1)


def test_separated_pair_checks_support():
    g = BIL_GRID
    u = SpectralField(g, ((g.freqs > 5) & (g.freqs < 6)).astype(complex))
    with pytest.raises(ArgumentError):
        SeparatedPair(u, u, (5.0, 5.5), (5.0, 6.0))


def test_degenerate_separation_rejected():
    g = BIL_GRID
    u = SpectralField(g, ((g.freqs > 5) & (g.freqs < 6)).astype(complex))
    pair = SeparatedPair.from_fields(u, u)
    assert pair.lam == 0
    with pytest.raises(DegenerateSeparationError):
        bilinear_ratio(pair)
    with pytest.raises(DegenerateSeparationError):
        separated_bumps(g, 0.0, 4.0)


def test_bilinear_band_check():
    with pytest.raises(ResolutionError):
        separated_bumps(Grid(64.0, 128), 8.0, 8.0)


def test_bilinear_symmetry():
    p = separated_bumps(BIL_GRID, 8.0, 8.0, crossing_time=0.5, phases=(0.3, 1.1))
    a = bilinear_ratio(p, M=64)
    b = bilinear_ratio(p.swapped(), M=64)
    assert abs(a - b) < 1e-12 * a


def test_bilinear_window_captures_full_line_norm():
    # the waves cross at t = 1/2 and separate long before the window ends
    p = separated_bumps(Grid(2048.0, 16384), 8.0, 8.0, width=1.0, crossing_time=0.5)
    window = bilinear_norm(p.u0, p.v0, T=1.0, M=256)
    full = bilinear_full_line_norm(p)
    assert window <= full
    assert window == pytest.approx(full, rel=1e-6)


def test_bilinear_constant_frozen():
    # regression: raw * 16 was 0.54346 for every crossing, shift and phase
    g = Grid(2048.0, 16384)
    C = []
    for k in range(20):
        r = np.random.default_rng([11, k])
        p = separated_bumps(g, 16, 16, width=1.0, crossing_time=r.uniform(0.4, 0.6),
                            shift=r.uniform(-100, 100), phases=tuple(r.uniform(0, 2 * np.pi, 2)))
        C.append(bilinear_norm(p.u0, p.v0) * 16)
    assert max(C) <= 0.55
    assert max(C) - min(C) < 1e-6


def test_bilinear_decay_short_sweep():
    res = bilinear_decay([4, 8, 16], length=2048.0, n=16384)
    assert abs(res.fitted_exponent + 0.5) < 0.05
    assert [s[0] for s in res.metadata["measured_separations"]] == pytest.approx([4, 8, 16], abs=0.01)


# ---- oracle

def test_oracle_zero_outside_resonance_set():
    p = separated_bumps(BIL_GRID, 8.0, 8.0, width=1.0)
    xi = np.array([4.0])
    # y^2 = xi^2/4 - (xi^3 - tau)/(3 xi) < 0 for tau well below xi^3/4
    tau = np.array([xi[0] ** 3 / 4 - 50.0])
    assert bilinear_spectral_oracle(p, tau, xi)[0, 0] == 0


def test_oracle_flags_singular_points():
    p = separated_bumps(BIL_GRID, 8.0, 8.0, width=1.0)
    out = bilinear_spectral_oracle(p, [1.0, 16.0], [0.0, 4.0])
    assert np.isnan(out[0]).all()
    assert np.isnan(out[1, 1])            # y = 0 at tau = xi^3 / 4


@given(st.floats(0.5, 40), st.floats(-2000, 2000))
def test_oracle_roots_solve_quadratic(xi, tau):
    y2 = xi ** 2 / 4 - (xi ** 3 - tau) / (3 * xi)
    if y2 < 0:
        return
    for r in (xi / 2 - math.sqrt(y2), xi / 2 + math.sqrt(y2)):
        g = tau + 3 * xi ** 2 * r - xi ** 3 - 3 * xi * r ** 2
        assert abs(g) <= 1e-10 * max(1.0, abs(tau), xi ** 3)


def test_oracle_matches_direct_transform():
    g = BIL_GRID
    p = separated_bumps(g, 8, 8, width=1.0)
    T = 1.0
    taper = T / (2 * np.pi)
    sm = 1 / taper
    xs = np.linspace(p.I1[0] + p.I2[0], p.I1[1] + p.I2[1], 34)[1:-1]
    xs = np.rint(xs / g.dxi) * g.dxi
    x1 = np.linspace(*p.I1, 50)
    phase = [x ** 3 - 3 * x * x1 * (x - x1) for x in xs]
    taus = np.linspace(min(map(np.min, phase)) - 2 * sm, max(map(np.max, phase)) + 2 * sm, 32)
    O = bilinear_spectral_oracle(p, taus, xs, smoothing=sm)
    D = bilinear_direct_transform(p, taus, xs, taper)
    assert oracle_relative_error(O, D) < 5e-2
