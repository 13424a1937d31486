import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import field_from
from tcm2d.errors import GridMismatch, InvalidOrder, NonFinite
from tcm2d.grid import VectorField, derivative, from_modes, grad, make_grid, perp_grad, zeros
from tcm2d.initial_data import ConeSpec, build_bump_chi, random_band_limited
from tcm2d.norms import (
    commutator_bracket,
    commutator_ratios,
    crossing_term,
    fit_constant,
    functionals,
    hdot_norm,
    hs_norm,
    l2_norm,
    linf_norm,
    multi_indices,
    multinorm,
    product_ratios,
    spectral_l1,
    winf_norm,
)

PI2 = np.pi**2


def test_zero_field_norms(grid2pi):
    z = zeros(grid2pi)
    assert all(hs_norm(z, s) == 0 for s in range(5))
    assert spectral_l1(z) == 0


def test_hs_of_diagonal_cosine(grid2pi):
    f = field_from(grid2pi, lambda x1, x2: np.cos(x1 - x2))
    assert hs_norm(f, 3) == pytest.approx(np.sqrt(20 * PI2), rel=1e-12)


def test_l2_of_cosine(grid2pi):
    f = field_from(grid2pi, lambda x1, x2: np.cos(x1))
    assert hs_norm(f, 0) == pytest.approx(np.sqrt(2 * PI2), rel=1e-12)


def test_hdot_is_top_order(grid2pi):
    f = field_from(grid2pi, lambda x1, x2: np.cos(x1 - x2))
    # four multi-indices of order 3, each of modulus 1
    assert hdot_norm(f, 3) == pytest.approx(np.sqrt(4 * 2 * PI2), rel=1e-12)


def test_multinorm(grid2pi, rng):
    f = random_band_limited(grid2pi, rng, 5)
    assert multinorm([f, zeros(grid2pi)], 2) == pytest.approx(hs_norm(f, 2))
    assert multinorm([f, f], 2) == pytest.approx(2 * hs_norm(f, 2))
    c = field_from(grid2pi, lambda x1, x2: np.cos(x1))
    s = field_from(grid2pi, lambda x1, x2: np.sin(x2))
    assert multinorm([c, s], 0) == pytest.approx(2 * np.sqrt(2 * PI2), rel=1e-12)
    with pytest.raises(GridMismatch):
        multinorm([f, zeros(make_grid(16, 2 * np.pi))], 0)


def test_spectral_l1_cosine(grid2pi):
    assert spectral_l1(field_from(grid2pi, lambda x1, x2: np.cos(x1))) == pytest.approx(1.0)


def test_spectral_l1_bump_baseline():
    g = make_grid(128, 40 * np.pi)
    chi = build_bump_chi(ConeSpec(0.1), g)
    oracle = float(np.abs(chi.full_coeffs()).sum())
    assert spectral_l1(chi) == pytest.approx(oracle, rel=1e-12)
    assert spectral_l1(chi) == pytest.approx(0.003583115955410755, rel=1e-9)


def test_winf_examples():
    g = make_grid(64, 2 * np.pi)
    const = field_from(g, lambda x1, x2: 5.0 + 0 * x1)
    assert winf_norm(const, 2) == pytest.approx(5.0, abs=1e-12)
    c = field_from(g, lambda x1, x2: np.cos(x1))
    assert winf_norm(c, 0) == pytest.approx(1.0, abs=1e-3)
    assert winf_norm(c, 1) == pytest.approx(2.0, abs=1e-3)


def test_invalid_order(grid2pi):
    f = zeros(grid2pi)
    with pytest.raises(InvalidOrder):
        hs_norm(f, 5)
    with pytest.raises(InvalidOrder):
        winf_norm(f, -1)
    with pytest.raises(InvalidOrder):
        commutator_bracket(zeros(grid2pi, True), f, (0, 0))
    with pytest.raises(InvalidOrder):
        commutator_bracket(zeros(grid2pi, True), f, (2, 2))


def test_functionals_zero(grid2pi):
    z, zv = zeros(grid2pi), zeros(grid2pi, True)
    out = functionals(zv, zv, z, zv, zv, z)
    assert (out.A, out.B, out.E, out.crossing) == (0, 0, 0, 0)


def test_crossing_vanishes_without_theta(grid2pi, rng):
    c = random_band_limited(grid2pi, rng, 6, vector=True)
    assert crossing_term(c, zeros(grid2pi)) == 0


def test_crossing_self_pairing(grid2pi, rng):
    theta = random_band_limited(grid2pi, rng, 6)
    c = grad(theta)
    expected = sum(l2_norm(derivative(c, a)) ** 2 for order in range(3) for a in multi_indices(order))
    assert crossing_term(c, theta) == pytest.approx(expected, rel=1e-10)
    assert expected > 0


def test_functionals_reject_nan(grid2pi):
    bad = zeros(grid2pi, True)
    bad.coeffs[0, 1, 1] = np.nan
    z = zeros(grid2pi)
    with pytest.raises(NonFinite):
        functionals(bad, bad, z, bad, bad, z)


def test_commutator_trivial_cases(grid2pi, rng):
    g = random_band_limited(grid2pi, rng, 5)
    const_vec = VectorField(grid2pi, np.zeros((2,) + grid2pi.spectral_shape, complex))
    const_vec.coeffs[:, 0, 0] = [1.5, -0.7]
    scale = np.abs(derivative(g, (1, 3)).coeffs).max()
    assert np.abs(commutator_bracket(const_vec, g, (1, 2)).coeffs).max() < 1e-13 * scale
    vec = random_band_limited(grid2pi, rng, 5, vector=True)
    const = from_modes(grid2pi, {})
    const.coeffs[0, 0] = 2.0
    assert np.abs(commutator_bracket(vec, const, (2, 1)).coeffs).max() == 0


def test_commutator_first_order_oracle(grid2pi, rng):
    # [d1, v.] grad g = (d1 v) . grad g
    vec = random_band_limited(grid2pi, rng, 5, vector=True)
    g = random_band_limited(grid2pi, rng, 5)
    br = commutator_bracket(vec, g, (1, 0)).values()
    dv = derivative(vec, (1, 0)).values()
    dg = grad(g).values()
    assert np.allclose(br, dv[0] * dg[0] + dv[1] * dg[1], atol=1e-12)


def test_cauchy_schwarz_for_crossing(grid2pi, rng):
    c = random_band_limited(grid2pi, rng, 6, vector=True)
    theta = random_band_limited(grid2pi, rng, 6)
    bound = hs_norm(c, 2) * hs_norm(grad(theta), 2)
    assert abs(crossing_term(c, theta)) <= bound * (1 + 1e-12)


def test_probe_ratios_finite(grid2pi, rng):
    vec = perp_grad(random_band_limited(grid2pi, rng, 5))
    g = random_band_limited(grid2pi, rng, 5)
    assert all(np.isfinite(r) and r > 0 for r in commutator_ratios(vec, g))
    assert all(np.isfinite(r) and r > 0 for r in product_ratios(g, random_band_limited(grid2pi, rng, 5)))


def test_fit_constant():
    fit = fit_constant([1.0, 2.0, 4.0])
    assert (fit.c_fit, fit.median, fit.spread) == (4.0, 2.0, 2.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), band=st.integers(1, 10), s=st.integers(0, 3))
def test_norm_properties(seed, band, s):
    g = make_grid(32, 2 * np.pi)
    f = random_band_limited(g, np.random.default_rng(seed), band)
    assert hs_norm(f, s) <= hs_norm(f, s + 1) * (1 + 1e-14)
    by_parts = sum(l2_norm(derivative(f, a)) ** 2 for order in range(s + 1) for a in multi_indices(order))
    assert hs_norm(f, s) ** 2 == pytest.approx(by_parts, rel=1e-10)
    assert linf_norm(f) <= spectral_l1(f) + 1e-10
