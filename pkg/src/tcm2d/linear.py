"""Closed-form linear flow and the forcing it induces.

``a(t) = e^{-mu t} a0`` and ``m(t) = e^{nu t Lap} m0`` are exact per-mode multipliers;
``U = (d2 a, -d1 a)`` and ``V = (m, m)``. The forcing triple

    f = -U.grad U - V.grad V - V div V,   g = -U.grad V - V.grad U,   h = -div V

is what the linear flow leaves behind in the renormalised equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import SpectralField, VectorField, irfft, perp_grad, rfft
from .norms import forcing_size, winf_norm


@dataclass(frozen=True)
class LinearFlow:
    data: object
    t: float
    a: SpectralField
    m: SpectralField
    mu: float = 1.0
    nu: float = 1.0

    @property
    def grid(self):
        return self.a.grid

    @property
    def U(self):
        return perp_grad(self.a)

    @property
    def V(self):
        return VectorField.from_components(self.m, self.m)

    def time_derivative(self):
        """``(dU/dt, dV/dt) = (-mu U, nu Lap V)`` as coefficient arrays."""
        grid = self.grid
        dU = -self.mu * self.U.coeffs
        dV = -self.nu * grid.ksq * self.V.coeffs
        return dU, dV


def evolve_linear(data, t, mu=1.0, nu=1.0):
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    grid = data.grid
    a = SpectralField(grid, np.exp(-mu * t) * data.a0.coeffs)
    m = SpectralField(grid, np.exp(-nu * t * grid.ksq) * data.m0.coeffs)
    return LinearFlow(data, float(t), a, m, mu, nu)


@dataclass(frozen=True)
class ForcingTriple:
    f: VectorField
    g: VectorField
    h: SpectralField
    t: float

    @property
    def E(self):
        return forcing_size(self.f, self.g, self.h)


def _physical(grid, coeff_list):
    return irfft(np.stack(coeff_list), grid.n_points)


def forcing_raw(flow):
    """Forcing from its defining products, each dealiased."""
    grid = flow.grid
    d1, d2 = grid.multiplier((1, 0)), grid.multiplier((0, 1))
    U = flow.U.coeffs
    mc = flow.m.coeffs
    U1, U2, dU11, dU12, dU21, dU22, m, dm1, dm2 = _physical(
        grid, [U[0], U[1], d1 * U[0], d2 * U[0], d1 * U[1], d2 * U[1], mc, d1 * mc, d2 * mc]
    )
    divV = dm1 + dm2
    # V = (m, m): V.grad V_i = m (dm1 + dm2) and V_i div V = m (dm1 + dm2)
    f1 = -(U1 * dU11 + U2 * dU12) - 2 * m * divV
    f2 = -(U1 * dU21 + U2 * dU22) - 2 * m * divV
    UgradV = U1 * dm1 + U2 * dm2
    g1 = -UgradV - m * (dU11 + dU12)
    g2 = -UgradV - m * (dU21 + dU22)
    fg = rfft(np.stack([f1, f2, g1, g2])) * grid.dealias_mask
    h = -(d1 + d2) * mc
    return ForcingTriple(VectorField(grid, fg[:2]), VectorField(grid, fg[2:]), SpectralField(grid, h), flow.t)


def forcing_factored(flow):
    """Forcing from the expansions in which every product carries a ``(d1 + d2)`` factor.

    With ``s = d1 + d2``:
        f1 = (s a) d2d2 a - d2 a d2(s a) - 2 m (s m)
        f2 = -(s a) d1d2 a + d2 a d1(s a) - 2 m (s m)
        g1 = (s a) d2 m - d2 a (s m) - m s(d2 a)
        g2 = (s a) d2 m - d2 a (s m) + m s(d1 a)
        h  = -s m
    """
    grid = flow.grid
    d1, d2 = grid.multiplier((1, 0)), grid.multiplier((0, 1))
    s = d1 + d2
    a, mc = flow.a.coeffs, flow.m.coeffs
    sa, a22, a2, sa2, a12, sa1, m, sm, m2, s_a2, s_a1 = _physical(
        grid,
        [s * a, d2 * d2 * a, d2 * a, d2 * s * a, d1 * d2 * a, d1 * s * a, mc, s * mc, d2 * mc, s * d2 * a, s * d1 * a],
    )
    msm = 2 * m * sm
    f1 = sa * a22 - a2 * sa2 - msm
    f2 = -sa * a12 + a2 * sa1 - msm
    common = sa * m2 - a2 * sm
    g1 = common - m * s_a2
    g2 = common + m * s_a1
    fg = rfft(np.stack([f1, f2, g1, g2])) * grid.dealias_mask
    h = -s * mc
    return ForcingTriple(VectorField(grid, fg[:2]), VectorField(grid, fg[2:]), SpectralField(grid, h), flow.t)


def forcing(flow, form="factored"):
    if form == "factored":
        return forcing_factored(flow)
    if form == "raw":
        return forcing_raw(flow)
    raise ValueError(f"unknown forcing form {form!r}")


@dataclass(frozen=True)
class DecaySample:
    t: float
    E: float
    scaled_E: float
    winf: float
    scaled_winf: float


def decay_envelope(data, times, s=4, mu=1.0, nu=1.0):
    """Measure ``E(t)``, ``e^t E(t)``, ``||U, V||_{W^{s,inf}}`` and its ``e^t``-scaled value.

    Everything is closed form; no time stepping is involved.
    """
    times = [float(t) for t in times]
    if not times:
        raise ValueError("times must be nonempty")
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be non-negative and nondecreasing")
    out = []
    for t in times:
        flow = evolve_linear(data, t, mu, nu)
        E = forcing_factored(flow).E
        w = winf_norm(flow.U, s) + winf_norm(flow.V, s)
        out.append(DecaySample(t, E, np.exp(t) * E, w, np.exp(t) * w))
    return out


def sup_scaled_forcing(data, t_max=5.0, n_times=51, mu=1.0, nu=1.0):
    """``sup_{t <= t_max} e^t E(t)`` sampled on a uniform time grid."""
    times = np.linspace(0.0, t_max, n_times)
    best = 0.0
    for t in times:
        E = forcing_factored(evolve_linear(data, t, mu, nu)).E
        best = max(best, np.exp(t) * E)
    return best
