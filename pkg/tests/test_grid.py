import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import field_from
from tcm2d.errors import InvalidGrid, NonFinite, ShapeMismatch
from tcm2d.grid import (
    RealField,
    SpectralField,
    VectorField,
    dealias,
    derivative,
    div,
    forward,
    from_modes,
    grad,
    inverse,
    laplacian,
    leray_project,
    make_grid,
    perp_grad,
    product,
)
from tcm2d.initial_data import random_band_limited
from tcm2d.norms import inner, l2_norm


def test_unit_lattice_on_2pi_side():
    g = make_grid(8, 2 * np.pi)
    assert g.dxi == pytest.approx(1.0)
    assert sorted(set(np.round(g.xi1.ravel(), 12))) == list(range(-4, 4))
    assert sorted(set(np.round(g.xi2.ravel(), 12))) == [0, 1, 2, 3, 4]


def test_spacing_for_long_side():
    assert make_grid(64, 80 * np.pi).dxi == pytest.approx(0.025)


@pytest.mark.parametrize("n, side", [(7, 1.0), (6, 1.0), (8, 0.0), (8, -2.0)])
def test_bad_grids_rejected(n, side):
    with pytest.raises(InvalidGrid):
        make_grid(n, side)


def test_constant_field_transform(grid2pi):
    f = field_from(grid2pi, lambda x1, x2: 3.0 + 0 * x1)
    assert f.coefficient(0, 0) == pytest.approx(3.0)
    f.coeffs[0, 0] = 0
    assert np.abs(f.coeffs).max() < 1e-14


def test_cosine_coefficients(grid2pi):
    f = field_from(grid2pi, lambda x1, x2: np.cos(x1))
    assert f.coefficient(1, 0) == pytest.approx(0.5)
    assert f.coefficient(-1, 0) == pytest.approx(0.5)


def test_round_trip_band_limited(grid2pi, rng):
    f = random_band_limited(grid2pi, rng, 8)
    back = forward(inverse(f))
    assert np.abs(back.coeffs - f.coeffs).max() <= 1e-12 * np.abs(f.coeffs).max()


def test_forward_is_hermitian(grid2pi, rng):
    vals = rng.standard_normal(grid2pi.shape)
    full = forward(RealField(grid2pi, vals)).full_coeffs()
    n = grid2pi.n_points
    idx = (-np.arange(n)) % n
    flipped = np.conj(full[idx][:, idx])
    # Nyquist rows are dropped, so compare away from them
    keep = np.ones((n, n), bool)
    keep[n // 2, :] = keep[:, n // 2] = False
    assert np.allclose(full[keep], flipped[keep], atol=1e-14)


def test_shape_and_finiteness_checks(grid2pi):
    with pytest.raises(ShapeMismatch):
        RealField(grid2pi, np.zeros((4, 4)))
    with pytest.raises(ShapeMismatch):
        forward(np.zeros(grid2pi.shape))
    bad = np.zeros(grid2pi.shape)
    bad[0, 0] = np.nan
    with pytest.raises(NonFinite):
        RealField(grid2pi, bad)
    with pytest.raises(ShapeMismatch):
        SpectralField(grid2pi, np.zeros((3, 3), complex))


def test_derivative_of_cosine(grid2pi):
    f = field_from(grid2pi, lambda x1, x2: np.cos(x1))
    x1, _ = grid2pi.coords()
    assert np.allclose(derivative(f, (1, 0)).values(), -np.sin(x1), atol=1e-13)
    assert np.array_equal(derivative(f, (0, 0)).coeffs, f.coeffs)


def test_laplacian_diagonal_mode(grid2pi):
    f = field_from(grid2pi, lambda x1, x2: np.cos(x1 - x2))
    assert np.allclose(laplacian(f).coeffs, -2 * f.coeffs, atol=1e-14)


def test_from_modes_convention(grid2pi):
    x1, x2 = grid2pi.coords()
    assert np.allclose(from_modes(grid2pi, {(1, 0): 0.5}).values(), np.cos(x1), atol=1e-14)
    assert np.allclose(from_modes(grid2pi, {(1, 0): -0.5j}).values(), np.sin(x1), atol=1e-14)
    assert np.allclose(from_modes(grid2pi, {(0, 2): 0.5}).values(), np.cos(2 * x2), atol=1e-14)


def test_dealias_band():
    g = make_grid(64, 2 * np.pi)
    inside = from_modes(g, {(5, 3): 1.0, (-21, 21): 0.3})
    assert np.array_equal(dealias(inside).coeffs, inside.coeffs)
    outside = from_modes(g, {(31, 0): 1.0})
    assert np.abs(dealias(outside).coeffs).max() == 0


def test_dealias_idempotent(grid2pi, rng):
    f = random_band_limited(grid2pi, rng, 15)
    once = dealias(f)
    assert np.array_equal(dealias(once).coeffs, once.coeffs)


def test_leray_kills_gradients(grid2pi):
    phi = field_from(grid2pi, lambda x1, x2: np.cos(x1 + 2 * x2))
    assert np.abs(leray_project(grad(phi)).coeffs).max() < 1e-14


def test_leray_keeps_solenoidal(grid2pi, rng):
    u = perp_grad(random_band_limited(grid2pi, rng, 8))
    assert np.allclose(leray_project(u).coeffs, u.coeffs, atol=1e-14)


def test_leray_on_cos_x1(grid2pi):
    v = field_from(grid2pi, lambda x1, x2: (np.cos(x1), 0 * x1))
    pv = leray_project(v)
    assert l2_norm(div(pv)) < 1e-12
    # (cos x1, 0) is itself the gradient of sin x1
    assert np.abs(pv.coeffs).max() < 1e-14


def test_leray_mixed_field(grid2pi, rng):
    a = random_band_limited(grid2pi, rng, 6)
    phi = random_band_limited(grid2pi, rng, 6)
    phi.coeffs[0, 0] = 0
    v = perp_grad(a) + grad(phi)
    pv = leray_project(v)
    assert np.allclose(pv.coeffs, perp_grad(a).coeffs, atol=1e-13)
    assert pv.is_divergence_free()


def test_parseval(grid2pi, rng):
    f = random_band_limited(grid2pi, rng, 10)
    direct = np.sum(f.values() ** 2) * grid2pi.spacing**2
    assert l2_norm(f) ** 2 == pytest.approx(direct, rel=1e-10)


def test_derivative_commutes_with_projection(grid2pi, rng):
    u = perp_grad(random_band_limited(grid2pi, rng, 8))
    a = derivative(leray_project(u), (2, 1))
    b = leray_project(derivative(u, (2, 1)))
    assert np.abs(a.coeffs - b.coeffs).max() <= 1e-12 * np.abs(a.coeffs).max()


def test_product_matches_pointwise_for_low_modes(grid2pi):
    f = from_modes(grid2pi, {(1, 2): 0.5})
    g = from_modes(grid2pi, {(2, -1): 0.25j})
    assert np.allclose(product(f, g).values(), f.values() * g.values(), atol=1e-14)


def test_vector_components(grid2pi):
    a = field_from(grid2pi, lambda x1, x2: np.sin(x1))
    b = field_from(grid2pi, lambda x1, x2: np.cos(x2))
    v = VectorField.from_components(a, b)
    assert np.array_equal(v[1].coeffs, b.coeffs)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), band=st.integers(1, 10))
def test_projection_is_orthogonal(seed, band):
    g = make_grid(32, 2 * np.pi)
    f = random_band_limited(g, np.random.default_rng(seed), band, vector=True)
    pf = leray_project(f)
    assert abs(inner(pf, f - pf)) <= 1e-10 * l2_norm(f) ** 2
    assert np.allclose(leray_project(pf).coeffs, pf.coeffs, atol=1e-14)
