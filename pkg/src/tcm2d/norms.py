"""Norms and energy functionals evaluated spectrally.

Integer Sobolev norms use the derivative-sum convention
``||f||_{H^s}^2 = sum_{|alpha| <= s} ||D^alpha f||_{L^2}^2``, which on the torus is the
multiplier ``m_s(xi) = sum_{|alpha| <= s} xi1^(2 a1) xi2^(2 a2)`` applied to ``S^2 |c_k|^2``.
Vector fields are measured with the Euclidean norm over components.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import GridMismatch, InvalidOrder, NonFinite
from .grid import irfft, product, rfft

MAX_ORDER = 4


def multi_indices(order):
    """All ``(a1, a2)`` with ``a1 + a2 == order``."""
    return [(order - j, j) for j in range(order + 1)]


def _check_order(s):
    if not isinstance(s, (int, np.integer)) or not 0 <= s <= MAX_ORDER:
        raise InvalidOrder(f"order must be an integer in 0..{MAX_ORDER}, got {s!r}")


@lru_cache(maxsize=64)
def sobolev_multiplier(grid, s, top_only=False):
    x1, x2 = grid.xi1**2, grid.xi2**2
    out = np.zeros(grid.spectral_shape)
    for order in range(s if top_only else 0, s + 1):
        for a1, a2 in multi_indices(order):
            out = out + x1**a1 * x2**a2
    out *= grid.retained
    out.setflags(write=False)
    return out


def _sumsq(grid, coeffs, mult=None):
    """``S^2 sum_k mult |c_k|^2`` over the full lattice (and over components)."""
    w = grid.weights if mult is None else grid.weights * mult
    return grid.side**2 * float(np.sum(w * (coeffs.real**2 + coeffs.imag**2)))


def l2_norm(f):
    return np.sqrt(_sumsq(f.grid, f.coeffs))


def hs_norm(f, s):
    _check_order(s)
    return np.sqrt(_sumsq(f.grid, f.coeffs, sobolev_multiplier(f.grid, s)))


def hdot_norm(f, s):
    """Top-order seminorm ``(sum_{|alpha| = s} ||D^alpha f||^2)^(1/2)``."""
    _check_order(s)
    return np.sqrt(_sumsq(f.grid, f.coeffs, sobolev_multiplier(f.grid, s, top_only=True)))


def gradient_hs_norm(f, s):
    """``||grad f||_{H^s}``, summing over every component of the gradient."""
    _check_order(s)
    return np.sqrt(_sumsq(f.grid, f.coeffs, f.grid.ksq * sobolev_multiplier(f.grid, s)))


def inner(f, g):
    """L^2 pairing ``<f, g>`` (summed over components for vector fields)."""
    if f.grid != g.grid:
        raise GridMismatch("fields live on different grids")
    prod = f.coeffs * np.conj(g.coeffs)
    return f.grid.side**2 * float(np.sum(f.grid.weights * prod.real))


def spectral_l1(f):
    """``sum_k |c_k|``, the series analogue of ``||f_hat||_{L^1}``; an upper bound on ``max |f|``."""
    return float(np.sum(f.grid.weights * np.abs(f.coeffs)))


def linf_norm(f):
    """Grid maximum of ``|f|`` (Euclidean magnitude for vector fields)."""
    vals = f.values()
    if vals.ndim == 3:
        return float(np.sqrt((vals**2).sum(axis=0)).max())
    return float(np.abs(vals).max())


def derivative_tensor_linf(f, order):
    """Grid max of the Euclidean magnitude of the full tensor of ``order``-th derivatives."""
    grid = f.grid
    alphas = multi_indices(order)
    coeffs = np.stack([f.coeffs * grid.multiplier(a) for a in alphas])
    vals = irfft(coeffs, grid.n_points)
    weights = np.array([comb(order, a[1]) for a in alphas], dtype=float)
    sq = vals**2
    if sq.ndim == 4:
        sq = sq.sum(axis=1)
    mag = np.tensordot(weights, sq, axes=(0, 0))
    return float(np.sqrt(mag.max()))


def winf_norm(f, s):
    """``sum_{i <= s} max |grad^i f|`` evaluated on the collocation grid."""
    _check_order(s)
    return sum(derivative_tensor_linf(f, i) for i in range(s + 1))


_NORMS = {
    "hs": hs_norm,
    "winf": winf_norm,
    "l1": lambda f, s: spectral_l1(f),
    "linf": lambda f, s: linf_norm(f),
}


def multinorm(fields, s, kind="hs"):
    """``||f_1, ..., f_n||_X = ||f_1||_X + ... + ||f_n||_X``."""
    fields = list(fields)
    if not fields:
        raise ValueError("multinorm needs at least one field")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise GridMismatch("fields live on different grids")
    norm = _NORMS[kind]
    return sum(norm(f, s) for f in fields)


@dataclass(frozen=True)
class EnergyFunctionals:
    A: float
    B: float
    E: float
    crossing: float
    A0: float | None = None


def energy_A(w, c, theta):
    """``||(w, c, theta)||_{H^3}^2``."""
    return hs_norm(w, 3) ** 2 + hs_norm(c, 3) ** 2 + hs_norm(theta, 3) ** 2


def energy_B(w, c, theta):
    """``||(w, grad c)||_{H^3}^2 + ||grad theta||_{H^2}^2``."""
    return hs_norm(w, 3) ** 2 + gradient_hs_norm(c, 3) ** 2 + gradient_hs_norm(theta, 2) ** 2


def forcing_size(f, g, h):
    """``E = ||f||_{H^3} + ||g||_{H^3} + ||h||_{H^3}`` (not squared)."""
    return hs_norm(f, 3) + hs_norm(g, 3) + hs_norm(h, 3)


def crossing_term(c, theta):
    """``sum_{|l| <= 2} <D^l c, D^l grad theta>``."""
    grid = c.grid
    if theta.grid != grid:
        raise GridMismatch("fields live on different grids")
    dtheta = np.stack([theta.coeffs * grid.multiplier((1, 0)), theta.coeffs * grid.multiplier((0, 1))])
    pair = (c.coeffs * np.conj(dtheta)).real.sum(axis=0)
    return grid.side**2 * float(np.sum(grid.weights * sobolev_multiplier(grid, 2) * pair))


def functionals(w, c, theta, f, g, h, A0=None):
    fields = (w, c, theta, f, g, h)
    grid = w.grid
    if any(x.grid != grid for x in fields):
        raise GridMismatch("fields live on different grids")
    if not all(x.is_finite() for x in fields):
        raise NonFinite("input field contains NaN or Inf")
    return EnergyFunctionals(
        A=energy_A(w, c, theta),
        B=energy_B(w, c, theta),
        E=forcing_size(f, g, h),
        crossing=crossing_term(c, theta),
        A0=A0,
    )


def _advect(vec_vals, grad_vals):
    """``vec . grad`` given physical vec ``(2, n, n)`` and gradient ``(2, ..., n, n)``."""
    return vec_vals[0] * grad_vals[0] + vec_vals[1] * grad_vals[1]


def commutator_bracket(vec, g, alpha):
    """``[D^alpha, vec .] grad g = D^alpha(vec . grad g) - vec . grad(D^alpha g)``.

    ``g`` may be scalar or vector; a vector ``g`` is treated componentwise.
    """
    if sum(alpha) == 0 or sum(alpha) > 3 or min(alpha) < 0:
        raise InvalidOrder(f"commutator needs 0 < |alpha| <= 3, got {alpha}")
    grid = vec.grid
    if g.grid != grid:
        raise GridMismatch("fields live on different grids")
    n = grid.n_points
    d1, d2 = grid.multiplier((1, 0)), grid.multiplier((0, 1))
    da = grid.multiplier(alpha)
    vv = irfft(vec.coeffs, n)
    first = rfft(_advect(vv, irfft(np.stack([g.coeffs * d1, g.coeffs * d2]), n)))
    second = rfft(_advect(vv, irfft(np.stack([g.coeffs * da * d1, g.coeffs * da * d2]), n)))
    out = (da * first - second) * grid.dealias_mask
    return g._wrap(out)


def commutator_ratios(vec, g):
    """Ratio of ``sum_{0<|alpha|<=3} ||[D^alpha, vec.] grad g||`` to the two commutator bounds.

    The commutator acts on ``grad g``, so that is the operand in the bounds:
    ``||grad g||_{H^2} ||grad vec||_inf + ||grad g||_inf ||vec||_{H^3}`` and
    ``(||grad vec||_inf + ||grad^3 vec||_inf) ||grad g||_{H^2}``.
    """
    lhs = 0.0
    for order in (1, 2, 3):
        for a in multi_indices(order):
            lhs += l2_norm(commutator_bracket(vec, g, a))
    dg_h2 = gradient_hs_norm(g, 2)
    dg_inf = derivative_tensor_linf(g, 1)
    dv_inf = derivative_tensor_linf(vec, 1)
    d3v_inf = derivative_tensor_linf(vec, 3)
    first = dg_h2 * dv_inf + dg_inf * hs_norm(vec, 3)
    second = (dv_inf + d3v_inf) * dg_h2
    return lhs / first, lhs / second


def product_ratios(f, g, m=3):
    """Ratios of ``||fg||_{H^m}`` to ``||f||_{H^m}||g||_{H^m}`` and to ``(||f||_inf + ||grad^m f||_inf)||g||_{H^m}``."""
    lhs = hs_norm(product(f, g), m)
    gm = hs_norm(g, m)
    first = hs_norm(f, m) * gm
    second = (linf_norm(f) + derivative_tensor_linf(f, m)) * gm
    return lhs / first, lhs / second


@dataclass(frozen=True)
class ConstantFit:
    """Empirical constant of an inequality probed over random trials."""

    ratios: np.ndarray
    c_fit: float
    median: float

    @property
    def spread(self):
        return self.c_fit / self.median


def fit_constant(ratios):
    r = np.asarray(ratios, dtype=float)
    return ConstantFit(ratios=r, c_fit=float(r.max()), median=float(np.median(r)))
