import numpy as np
import pytest

from tcm2d.grid import from_modes, make_grid
from tcm2d.initial_data import (
    ConeSpec,
    LinearData,
    build_remark_data,
    random_cone_field,
    resolving_grid,
)
from tcm2d.linear import decay_envelope, evolve_linear, forcing, forcing_factored, forcing_raw
from tcm2d.norms import derivative_tensor_linf, hs_norm, spectral_l1


def h3_gap(p, q):
    return hs_norm(p.f - q.f, 3) + hs_norm(p.g - q.g, 3) + hs_norm(p.h - q.h, 3)


@pytest.fixture(scope="module")
def cone_grid():
    return ConeSpec(0.2), resolving_grid(0.2)


def diagonal(grid):
    return from_modes(grid, {(-1, 1): 0.5})


def test_time_zero_is_identity(cone_grid, rng):
    cone, g = cone_grid
    data = LinearData(random_cone_field(cone, g, rng), random_cone_field(cone, g, rng), cone)
    flow = evolve_linear(data, 0.0)
    assert np.array_equal(flow.a.coeffs, data.a0.coeffs) and np.array_equal(flow.m.coeffs, data.m0.coeffs)


def test_closed_form_multipliers(grid2pi):
    d = diagonal(grid2pi)
    data = LinearData(d, d, ConeSpec(0.2))
    flow = evolve_linear(data, np.log(2))
    assert np.allclose(flow.a.coeffs, d.coeffs / 2, atol=1e-15)
    flow = evolve_linear(data, 1.0)
    assert np.allclose(flow.m.coeffs, np.exp(-2) * d.coeffs, atol=1e-15)
    with pytest.raises(ValueError):
        evolve_linear(data, -1.0)


def test_zero_data_zero_forcing(grid2pi):
    data = LinearData.zero(grid2pi, ConeSpec(0.2))
    for form in ("raw", "factored"):
        trip = forcing(evolve_linear(data, 0.3), form)
        assert trip.E == 0


def test_diagonal_data_zero_forcing(grid2pi):
    d = diagonal(grid2pi)
    for a0 in (d * 0.0, d):
        data = LinearData(a0, d, ConeSpec(0.2))
        for form in ("raw", "factored"):
            assert forcing(evolve_linear(data, 0.5), form).E <= 1e-12


def test_forcing_linear_in_strip_offset():
    g = make_grid(256, 80 * np.pi)
    sizes = []
    for j in (1, 2):
        mode = from_modes(g, {(40, -40 + j): 0.5})
        data = LinearData(mode, mode, ConeSpec(0.1))
        trip = forcing_raw(evolve_linear(data, 0.0))
        sizes.append((hs_norm(trip.f, 3), trip.E))
    assert sizes[0][0] > 0
    assert sizes[1][0] / sizes[0][0] == pytest.approx(2.0, rel=0.05)
    assert sizes[1][1] / sizes[0][1] == pytest.approx(2.0, rel=0.05)


def test_raw_matches_factored(cone_grid, rng):
    cone, g = cone_grid
    for _ in range(3):
        data = LinearData(random_cone_field(cone, g, rng), random_cone_field(cone, g, rng), cone)
        flow = evolve_linear(data, rng.uniform(0, 2))
        fac = forcing_factored(flow)
        assert h3_gap(forcing_raw(flow), fac) <= 1e-10 * fac.E


def test_h_is_strip_multiplier(cone_grid, rng):
    cone, g = cone_grid
    data = LinearData(random_cone_field(cone, g, rng), random_cone_field(cone, g, rng), cone)
    flow = evolve_linear(data, 0.7)
    h = forcing_factored(flow).h
    expected = -1j * (g.xi1 + g.xi2) * flow.m.coeffs
    assert np.abs(h.coeffs - expected).max() <= 1e-12 * np.abs(expected).max()


def test_support_never_grows(cone_grid, rng):
    cone, g = cone_grid
    data = LinearData(random_cone_field(cone, g, rng), random_cone_field(cone, g, rng), cone)
    flow = evolve_linear(data, 3.0)
    assert np.array_equal(flow.a.coeffs != 0, data.a0.coeffs != 0)
    assert np.array_equal(flow.m.coeffs != 0, data.m0.coeffs != 0)
    assert np.abs(flow.U.coeffs[0] * g.xi1 + flow.U.coeffs[1] * g.xi2).max() <= 1e-14 * np.abs(flow.U.coeffs).max()


def test_heat_dominated_by_damping_on_cone(cone_grid):
    cone, g = cone_grid
    on = cone.mask(g)
    for t in (0.1, 1.0, 5.0):
        assert np.all(np.exp(-g.ksq[on] * t) <= np.exp(-t))


def test_decay_envelope_zero_data(grid2pi):
    samples = decay_envelope(LinearData.zero(grid2pi, ConeSpec(0.2)), [0, 1, 2])
    assert all(s.E == 0 for s in samples)


def test_scaled_winf_nonincreasing(cone_grid):
    cone, g = cone_grid
    data = build_remark_data(cone, g)
    samples = decay_envelope(data, np.linspace(0, 3, 7))
    scaled = [s.scaled_winf for s in samples]
    assert all(b <= a * 1.01 for a, b in zip(scaled, scaled[1:]))
    with pytest.raises(ValueError):
        decay_envelope(data, [1.0, 0.5])


def test_h_decays_like_damping(cone_grid):
    cone, g = cone_grid
    data = build_remark_data(cone, g)
    h0 = hs_norm(forcing_factored(evolve_linear(data, 0.0)).h, 3)
    for t in (0.5, 1.0, 4.0):
        assert hs_norm(forcing_factored(evolve_linear(data, t)).h, 3) <= np.exp(-t) * h0 * (1 + 1e-12)


def test_top_derivative_bound(cone_grid):
    cone, g = cone_grid
    data = build_remark_data(cone, g)
    l1 = spectral_l1(data.a0)
    for M in (1, 2, 3, 4):
        for t in (0.0, 1.0):
            a = evolve_linear(data, t).a
            assert derivative_tensor_linf(a, M) <= np.exp(-t) * 2**M * l1
