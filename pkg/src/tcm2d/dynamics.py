"""Right-hand sides of the full model and of its renormalised form.

Full system on the torus, with ``P`` the Leray projection:

    du/dt  = -P[u.grad u + div(v (x) v)] - mu u
    dv/dt  = -u.grad v - v.grad u - grad theta + nu Lap v
    dth/dt = -u.grad theta - div v

with ``div(v (x) v)_i = d_j (v_j v_i)``. Writing ``u = U + w`` and ``v = V + c`` around the
closed-form linear flow gives the perturbation equations evaluated by
``rhs_perturbation``. All quadratic products are pseudospectral and dealiased.

States are packed internally as a ``(5, n, n // 2 + 1)`` coefficient array holding
``(u1, u2, v1, v2, theta)`` or ``(w1, w2, c1, c2, theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NonFinite, TimeMismatch
from .grid import SpectralField, VectorField, irfft, project_coeffs, rfft
from .norms import gradient_hs_norm, inner, l2_norm

TIME_TOL = 1e-12


def _same_time(t1, t2):
    return abs(t1 - t2) <= TIME_TOL * max(1.0, abs(t1), abs(t2))


def _pack(grid, first, second, theta):
    for fld in (first, second, theta):
        if fld.grid != grid:
            raise GridMismatch("state fields live on different grids")
    return np.concatenate([first.coeffs, second.coeffs, theta.coeffs[None]])


def _unpack(grid, X):
    return VectorField(grid, X[0:2]), VectorField(grid, X[2:4]), SpectralField(grid, X[4])


@dataclass(frozen=True)
class TCMState:
    u: VectorField
    v: VectorField
    theta: SpectralField
    t: float = 0.0
    mu: float = 1.0
    nu: float = 1.0

    @property
    def grid(self):
        return self.u.grid

    def pack(self):
        return _pack(self.grid, self.u, self.v, self.theta)

    @classmethod
    def from_array(cls, grid, X, t=0.0, mu=1.0, nu=1.0):
        return cls(*_unpack(grid, X), t=t, mu=mu, nu=nu)


@dataclass(frozen=True)
class PerturbationState:
    w: VectorField
    c: VectorField
    theta: SpectralField
    t: float = 0.0

    @property
    def grid(self):
        return self.w.grid

    def pack(self):
        return _pack(self.grid, self.w, self.c, self.theta)

    @classmethod
    def from_array(cls, grid, X, t=0.0):
        return cls(*_unpack(grid, X), t=t)


@dataclass(frozen=True)
class Tendency:
    """Time derivative of a state: ``(du, dv, dtheta)`` or ``(dw, dc, dtheta)``."""

    first: VectorField
    second: VectorField
    theta: SpectralField

    def pack(self):
        return _pack(self.first.grid, self.first, self.second, self.theta)


def linear_symbol(grid, mu, nu):
    """Diagonal linear part per packed slot: damping on the first vector, heat on the second."""
    L = np.zeros((5,) + grid.spectral_shape)
    L[0:2] = -mu
    L[2:4] = -nu * grid.ksq
    return L


def _check_finite(X):
    if not np.all(np.isfinite(X)):
        raise NonFinite("state contains NaN or Inf")


def full_terms(grid, X):
    """Everything in the full right-hand side except ``-mu u`` and ``nu Lap v``."""
    d1, d2 = grid.multiplier((1, 0)), grid.multiplier((0, 1))
    phys = irfft(np.concatenate([X, d1 * X, d2 * X]), grid.n_points)
    (u1, u2, v1, v2, _), g1, g2 = phys[0:5], phys[5:10], phys[10:15]
    divv = g1[2] + g2[3]
    prods = np.stack(
        [
            u1 * g1[0] + u2 * g2[0] + v1 * g1[2] + v2 * g2[2] + v1 * divv,
            u1 * g1[1] + u2 * g2[1] + v1 * g1[3] + v2 * g2[3] + v2 * divv,
            u1 * g1[2] + u2 * g2[2] + v1 * g1[0] + v2 * g2[0],
            u1 * g1[3] + u2 * g2[3] + v1 * g1[1] + v2 * g2[1],
            u1 * g1[4] + u2 * g2[4],
        ]
    )
    N = rfft(prods) * grid.dealias_mask
    out = np.empty_like(X)
    out[0:2] = -project_coeffs(grid, N[0:2])
    out[2] = -N[2] - d1 * X[4]
    out[3] = -N[3] - d2 * X[4]
    out[4] = -N[4] - d1 * X[2] - d2 * X[3]
    return out


def perturbation_terms(grid, X, U, m, forcing):
    """Everything in the perturbation right-hand side except ``-mu w`` and ``nu Lap c``.

    ``U`` is the ``(2, ...)`` coefficient array of the linear velocity, ``m`` the scalar
    whose duplicate forms ``V = (m, m)``, ``forcing`` a ``(5, ...)`` array ``(f, g, h)``.
    """
    d1, d2 = grid.multiplier((1, 0)), grid.multiplier((0, 1))
    lin = np.stack([U[0], U[1], d1 * U[0], d1 * U[1], d2 * U[0], d2 * U[1], m, d1 * m, d2 * m])
    phys = irfft(np.concatenate([X, d1 * X, d2 * X, lin]), grid.n_points)
    (w1, w2, c1, c2, _), g1, g2 = phys[0:5], phys[5:10], phys[10:15]
    U1, U2, U1_1, U2_1, U1_2, U2_2, mm, m_1, m_2 = phys[15:24]
    divc = g1[2] + g2[3]
    divV = m_1 + m_2
    # slot order in g1/g2: w1, w2, c1, c2, theta
    def w_dot(i):
        return w1 * g1[i] + w2 * g2[i]

    def U_dot(i):
        return U1 * g1[i] + U2 * g2[i]

    def c_dot(i):
        return c1 * g1[i] + c2 * g2[i]

    def V_dot(i):
        return mm * (g1[i] + g2[i])

    w_gradU = (w1 * U1_1 + w2 * U1_2, w1 * U2_1 + w2 * U2_2)
    c_gradU = (c1 * U1_1 + c2 * U1_2, c1 * U2_1 + c2 * U2_2)
    c_gradm = c1 * m_1 + c2 * m_2
    w_gradm = w1 * m_1 + w2 * m_2
    cs = (c1, c2)
    mom = [
        w_dot(i) + U_dot(i) + c_dot(2 + i) + cs[i] * divc
        + c_gradm + cs[i] * divV + V_dot(2 + i) + mm * divc + w_gradU[i]
        for i in (0, 1)
    ]
    bar = [
        w_dot(2 + i) + U_dot(2 + i) + c_dot(i) + V_dot(i) + c_gradU[i] + w_gradm
        for i in (0, 1)
    ]
    heat = w_dot(4) + U_dot(4)
    N = rfft(np.stack(mom + bar + [heat])) * grid.dealias_mask
    out = np.empty_like(X)
    out[0:2] = project_coeffs(grid, forcing[0:2] - N[0:2])
    out[2] = forcing[2] - N[2] - d1 * X[4]
    out[3] = forcing[3] - N[3] - d2 * X[4]
    out[4] = forcing[4] - N[4] - d1 * X[2] - d2 * X[3]
    return out


def pack_forcing(forcing):
    return np.concatenate([forcing.f.coeffs, forcing.g.coeffs, forcing.h.coeffs[None]])


def rhs_full(state):
    grid = state.grid
    X = state.pack()
    _check_finite(X)
    dX = full_terms(grid, X) + linear_symbol(grid, state.mu, state.nu) * X
    return Tendency(*_unpack(grid, dX))


def rhs_perturbation(p, flow, forcing):
    """Tendency of ``(w, c, theta)``; ``flow`` and ``forcing`` must be evaluated at ``p.t``."""
    if not _same_time(flow.t, p.t) or not _same_time(forcing.t, p.t):
        raise TimeMismatch(f"state at t={p.t}, flow at t={flow.t}, forcing at t={forcing.t}")
    grid = p.grid
    if flow.grid != grid:
        raise GridMismatch("flow and state live on different grids")
    X = p.pack()
    _check_finite(X)
    dX = perturbation_terms(grid, X, flow.U.coeffs, flow.m.coeffs, pack_forcing(forcing))
    dX += linear_symbol(grid, flow.mu, flow.nu) * X
    return Tendency(*_unpack(grid, dX))


def momentum_nonlinearity(state):
    """Unprojected ``u.grad u + div(v (x) v)``, dealiased."""
    grid = state.grid
    X = state.pack()
    d1, d2 = grid.multiplier((1, 0)), grid.multiplier((0, 1))
    (u1, u2, v1, v2), g1, g2 = irfft(np.concatenate([X[:4], d1 * X[:4], d2 * X[:4]]), grid.n_points).reshape(3, 4, *grid.shape)
    divv = g1[2] + g2[3]
    prods = np.stack(
        [
            u1 * g1[0] + u2 * g2[0] + v1 * g1[2] + v2 * g2[2] + v1 * divv,
            u1 * g1[1] + u2 * g2[1] + v1 * g1[3] + v2 * g2[3] + v2 * divv,
        ]
    )
    return VectorField(grid, rfft(prods) * grid.dealias_mask)


def compute_pressure(state):
    """Pressure from ``-Lap p = div N`` with zero mean, ``N = u.grad u + div(v (x) v)``.

    The projected nonlinearity then satisfies ``P[N] = N + grad p``.
    """
    grid = state.grid
    N = momentum_nonlinearity(state).coeffs
    ksq = np.where(grid.ksq == 0, 1.0, grid.ksq)
    divN = grid.multiplier((1, 0)) * N[0] + grid.multiplier((0, 1)) * N[1]
    p = divN / ksq
    p[0, 0] = 0.0
    return SpectralField(grid, p * grid.retained)


def recompose(p, flow):
    """``(u, v, theta) = (U + w, V + c, theta)``."""
    if not _same_time(flow.t, p.t):
        raise TimeMismatch(f"perturbation at t={p.t}, flow at t={flow.t}")
    if flow.grid != p.grid:
        raise GridMismatch("flow and perturbation live on different grids")
    return TCMState(p.w + flow.U, p.c + flow.V, p.theta, t=p.t, mu=flow.mu, nu=flow.nu)


def decompose(state, flow):
    if not _same_time(flow.t, state.t):
        raise TimeMismatch(f"state at t={state.t}, flow at t={flow.t}")
    return PerturbationState(state.u - flow.U, state.v - flow.V, state.theta, t=state.t)


def transport(b, a):
    """Convective form ``(b . grad) a`` for vector fields, dealiased."""
    grid = a.grid
    d1, d2 = grid.multiplier((1, 0)), grid.multiplier((0, 1))
    bb = irfft(b.coeffs, grid.n_points)
    da1, da2 = irfft(np.stack([d1 * a.coeffs, d2 * a.coeffs]), grid.n_points)
    return VectorField(grid, rfft(bb[0] * da1 + bb[1] * da2) * grid.dealias_mask)


def transport_conservative(b, a):
    """Conservative form ``div(a (x) b) - a div b`` of ``(b . grad) a``."""
    grid = a.grid
    d1, d2 = grid.multiplier((1, 0)), grid.multiplier((0, 1))
    aa, bb = irfft(a.coeffs, grid.n_points), irfft(b.coeffs, grid.n_points)
    divb = irfft(d1 * b.coeffs[0] + d2 * b.coeffs[1], grid.n_points)
    flux1 = rfft(aa * bb[0]) * grid.dealias_mask
    flux2 = rfft(aa * bb[1]) * grid.dealias_mask
    return VectorField(grid, d1 * flux1 + d2 * flux2 - rfft(aa * divb) * grid.dealias_mask)


def l2_energy(state):
    """``(||u||^2 + ||v||^2 + ||theta||^2) / 2``."""
    return 0.5 * (l2_norm(state.u) ** 2 + l2_norm(state.v) ** 2 + l2_norm(state.theta) ** 2)


def dissipation(state):
    """``mu ||u||^2 + nu ||grad v||^2``."""
    return state.mu * l2_norm(state.u) ** 2 + state.nu * gradient_hs_norm(state.v, 0) ** 2


def energy_rate(state, tendency=None):
    """``d/dt`` of the L^2 energy implied by ``tendency`` (``rhs_full`` when omitted)."""
    tendency = rhs_full(state) if tendency is None else tendency
    return inner(tendency.first, state.u) + inner(tendency.second, state.v) + inner(tendency.theta, state.theta)
