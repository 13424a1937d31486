"""Fourier-cone-supported initial data for the tropical climate model.

The cone is ``{xi : |xi1 + xi2| <= eps, 1 <= |xi| <= 2}``: a thin band around the
anti-diagonal, so that ``(d1 + d2)`` applied to any field supported there is of size
``eps``. Profiles built on it are discretised as Riemann sums of the inverse Fourier
integral: a profile value ``phi(xi_k)`` becomes the series coefficient
``phi(xi_k) * (dxi / 2 pi)^2``. With that scaling ``spectral_l1`` and the L^2 norm
approximate their whole-plane counterparts independently of the torus size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EpsilonTooLarge, NotDivergenceFree, SupportViolation, UnresolvedCone
from .grid import SpectralField, VectorField, div, irfft, make_grid, perp_grad, rfft, zeros
from .norms import energy_A, hs_norm, l2_norm, spectral_l1

INNER_RING = (4.0 / 3.0, 5.0 / 3.0)
OUTER_RING = (1.0, 2.0)


def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)

    def g(s):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)

    a, b = g(t), g(1.0 - t)
    return a / (a + b)


@dataclass(frozen=True)
class ConeSpec:
    """The frequency cone for a given ``epsilon`` (any positive value)."""

    epsilon: float

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def contains(self, xi1, xi2):
        r = np.hypot(xi1, xi2)
        return (np.abs(xi1 + xi2) <= self.epsilon) & (r >= OUTER_RING[0]) & (r <= OUTER_RING[1])

    def inner_contains(self, xi1, xi2):
        r = np.hypot(xi1, xi2)
        return (np.abs(xi1 + xi2) <= self.epsilon / 2) & (r >= INNER_RING[0]) & (r <= INNER_RING[1])

    def profile(self, xi1, xi2):
        """Bump ``chi_hat``: 1 on the inner cone, 0 off the cone, smooth in between."""
        eps = self.epsilon
        s = np.abs(np.asarray(xi1) + np.asarray(xi2))
        r = np.hypot(xi1, xi2)
        strip = smooth_step((eps - s) / (eps / 2))
        rise = smooth_step((r - OUTER_RING[0]) / (INNER_RING[0] - OUTER_RING[0]))
        fall = smooth_step((OUTER_RING[1] - r) / (OUTER_RING[1] - INNER_RING[1]))
        return strip * rise * fall

    def mask(self, grid):
        return self.contains(grid.xi1, grid.xi2) & grid.retained

    def check_resolved(self, grid):
        """Raise ``UnresolvedCone`` unless the lattice resolves the strip and holds the cone
        inside the dealiased band."""
        if grid.dxi > self.epsilon / 2 * (1 + 1e-12):
            raise UnresolvedCone(
                f"lattice spacing {grid.dxi:.6g} exceeds epsilon/2 = {self.epsilon / 2:.6g}; "
                f"use side >= {4 * np.pi / self.epsilon:.6g}"
            )
        reach = (OUTER_RING[1] + self.epsilon) / np.sqrt(2)
        if (grid.n_points // 3) * grid.dxi < reach:
            raise UnresolvedCone(
                f"dealiased band max|xi_i| = {(grid.n_points // 3) * grid.dxi:.4g} "
                f"does not contain the cone (needs {reach:.4g}); increase n_points"
            )


def transform_scale(grid):
    """Weight ``(dxi / 2 pi)^2`` turning profile samples into series coefficients."""
    return (grid.dxi / (2 * np.pi)) ** 2


def remark_amplitude(epsilon):
    """``(1/eps) (log log 1/eps)^(1/2)``; requires ``eps < 1/e``."""
    if not 0 < epsilon < np.exp(-1):
        raise EpsilonTooLarge(f"epsilon must lie in (0, 1/e) for this amplitude, got {epsilon}")
    return np.sqrt(np.log(np.log(1.0 / epsilon))) / epsilon


def verify_support(f, cone, atol=0.0):
    """True iff every coefficient with ``|c_k| > atol`` sits inside the closed cone."""
    outside = ~cone.contains(f.grid.xi1, f.grid.xi2)
    mags = np.abs(f.coeffs)
    if mags.ndim == 3:
        mags = mags.max(axis=0)
    return not bool(np.any(mags[outside] > atol))


def build_bump_chi(cone, grid):
    cone.check_resolved(grid)
    coeffs = cone.profile(grid.xi1, grid.xi2) * cone.mask(grid) * transform_scale(grid)
    return SpectralField(grid, coeffs)


def random_cone_field(cone, grid, rng, scale=1.0):
    """Random real field whose spectrum fills the cone lattice points (for testing)."""
    m = cone.mask(grid)
    z = rng.standard_normal(grid.spectral_shape) + 1j * rng.standard_normal(grid.spectral_shape)
    # k2 = 0 column needs explicit Hermitian symmetry; the cone never touches it for eps < 1
    m = m & (grid.k2 > 0)
    return SpectralField(grid, scale * z * m * transform_scale(grid))


@dataclass(frozen=True)
class LinearData:
    """Spectra of the profiles ``a0`` and ``m0``; both must lie in the cone."""

    a0: SpectralField
    m0: SpectralField
    cone: ConeSpec
    support_atol: float = field(default=0.0, repr=False)

    def __post_init__(self):
        if self.a0.grid != self.m0.grid:
            raise ValueError("a0 and m0 live on different grids")
        for name in ("a0", "m0"):
            if not verify_support(getattr(self, name), self.cone, self.support_atol):
                raise SupportViolation(f"{name} has spectral content outside the cone")

    @property
    def grid(self):
        return self.a0.grid

    @classmethod
    def zero(cls, grid, cone):
        return cls(zeros(grid), zeros(grid), cone)


def build_remark_data(cone, grid):
    """``a0 = m0 = (1/eps)(log log 1/eps)^(1/2) chi``."""
    amp = remark_amplitude(cone.epsilon)
    chi = build_bump_chi(cone, grid)
    return LinearData(amp * chi, amp * chi, cone)


@dataclass(frozen=True)
class InitialCondition:
    linear: LinearData
    w0: VectorField
    c0: VectorField
    theta0: SpectralField

    @property
    def grid(self):
        return self.linear.grid

    @property
    def U0(self):
        return perp_grad(self.linear.a0)

    @property
    def V0(self):
        m = self.linear.m0
        return VectorField.from_components(m, m)

    @property
    def u0(self):
        return self.U0 + self.w0

    @property
    def v0(self):
        return self.V0 + self.c0

    @property
    def A0(self):
        return energy_A(self.w0, self.c0, self.theta0)


def assemble_initial(linear, w0=None, c0=None, theta0=None, rtol=1e-10):
    """Bundle the linear data with perturbations; ``w0`` must be divergence-free."""
    grid = linear.grid
    w0 = zeros(grid, vector=True) if w0 is None else w0
    c0 = zeros(grid, vector=True) if c0 is None else c0
    theta0 = zeros(grid) if theta0 is None else theta0
    size = l2_norm(w0)
    if size > 0 and l2_norm(div(w0)) > rtol * max(size, hs_norm(w0, 1)):
        raise NotDivergenceFree(f"div w0 exceeds {rtol:g} relative")
    return InitialCondition(linear, w0, c0, theta0)


@dataclass(frozen=True)
class ConditionTerms:
    """Pieces of the smallness condition for one data set."""

    A0: float
    epsilon: float
    a0_l2: float
    a0_l1: float
    m0_l2: float
    m0_l1: float

    @property
    def linear_part(self):
        return self.a0_l2 * self.a0_l1 + self.m0_l2 * (1.0 + self.m0_l1)

    @property
    def l1_sum(self):
        return self.a0_l1 + self.m0_l1

    def value(self, C):
        x = self.epsilon * self.linear_part
        y = self.l1_sum
        return (self.A0 + x) * np.exp(C * x + C * (y + y * y))


def condition_terms(ic):
    a0, m0 = ic.linear.a0, ic.linear.m0
    return ConditionTerms(
        A0=ic.A0,
        epsilon=ic.linear.cone.epsilon,
        a0_l2=l2_norm(a0),
        a0_l1=spectral_l1(a0),
        m0_l2=l2_norm(m0),
        m0_l1=spectral_l1(m0),
    )


def condition_lhs(ic, C=1.0):
    """Left side of the global-existence smallness condition at constant ``C``.

    ``(A0 + eps X) exp{C eps X + C (Y + Y^2)}`` with
    ``X = ||a0|| ||a0_hat||_1 + ||m0|| (1 + ||m0_hat||_1)`` and
    ``Y = ||a0_hat||_1 + ||m0_hat||_1``. The ``1 +`` term is kept.
    """
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    return float(condition_terms(ic).value(C))


def condition_curve(ic, constants):
    terms = condition_terms(ic)
    return np.array([terms.value(C) for C in constants])


def remark_closed_form(epsilon, C=1.0):
    """``C eps^(1/2) (log log 1/eps) exp{C log log 1/eps}``, the asymptotic size of the condition
    for the example data."""
    L = np.log(np.log(1.0 / epsilon))
    return C * np.sqrt(epsilon) * L * np.exp(C * L)


def minimal_side(epsilon):
    """Smallest torus side whose lattice spacing resolves the strip (``dxi = eps / 2``)."""
    return 4 * np.pi / epsilon


def random_band_limited(grid, rng, kmax, scale=1.0, vector=False, decay=0.0):
    """Random real field with integer wavenumbers ``max(|k1|, |k2|) <= kmax``.

    Coefficients are i.i.d. complex normals times ``(1 + |k|^2)^(-decay/2)``; the
    ``k2 = 0`` column is symmetrised so the field is real.
    """
    shape = ((2,) if vector else ()) + grid.spectral_shape
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    k1, k2 = grid.k1, grid.k2
    band = (np.abs(k1) <= kmax) & (k2 <= kmax) & grid.retained
    z = z * band * (1.0 + k1**2 + k2**2) ** (-decay / 2)
    full = SpectralField if not vector else VectorField
    f = full(grid, scale * z)
    # round trip through real space enforces Hermitian symmetry on the k2 = 0 column
    return f._wrap(rfft(irfft(f.coeffs, grid.n_points)) * band)


def random_solenoidal(grid, rng, kmax, scale=1.0, decay=0.0):
    """``perp_grad`` of a random band-limited stream function."""
    return perp_grad(random_band_limited(grid, rng, kmax, scale, decay=decay))


def resolving_grid(epsilon, side_factor=1.0):
    """Smallest grid on a torus of ``side_factor * minimal_side(eps)`` that resolves the cone.

    ``n_points`` is even and not a multiple of 3, so the two-thirds band removes every
    aliased product mode.
    """
    side = side_factor * minimal_side(epsilon)
    dxi = 2 * np.pi / side
    reach = (OUTER_RING[1] + epsilon) / np.sqrt(2)
    n = 8
    while (n // 3) * dxi < reach or n % 3 == 0:
        n += 2
    return make_grid(n, side)
