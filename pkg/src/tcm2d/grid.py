"""Periodic grid, spectral transforms and the differential operators built on them.

Fields live on the torus ``[0, side)^2``. Coefficients follow the Fourier-series
convention ``f(x) = sum_k c_k exp(i xi_k . x)`` with ``xi_k = 2 pi k / side``, so
``max |f| <= sum |c_k|`` holds with constant one. Only the non-redundant half plane
``k2 >= 0`` is stored (the ``rfft2`` layout); every field is real-valued and its
Hermitian partner ``c_{-k} = conj(c_k)`` is implied.

Array layout: physical values are indexed ``[..., i1, i2]`` with ``x1 = i1 * side / n``;
coefficients are indexed ``[..., k1 (fft order), k2 >= 0]``. A vector field carries a
leading axis of length two.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatch, InvalidGrid, NonFinite, ShapeMismatch

__all__ = [
    "Grid",
    "make_grid",
    "SpectralField",
    "VectorField",
    "RealField",
    "forward",
    "inverse",
    "derivative",
    "dealias",
    "leray_project",
    "grad",
    "div",
    "laplacian",
    "perp_grad",
    "product",
    "from_modes",
]


def fft_workers():
    """Thread count for the FFT backend, read from ``TCM2D_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("TCM2D_THREADS", "1")))
    except ValueError:
        return 1


def rfft(values):
    return sfft.rfft2(values, axes=(-2, -1), norm="forward", workers=fft_workers())


def irfft(coeffs, n):
    return sfft.irfft2(coeffs, s=(n, n), axes=(-2, -1), norm="forward", workers=fft_workers())


@dataclass(frozen=True)
class Grid:
    """Uniform ``n_points x n_points`` grid on the torus of side ``side``."""

    n_points: int
    side: float

    def __post_init__(self):
        n = self.n_points
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise InvalidGrid(f"n_points must be an integer, got {n!r}")
        if n < 8 or n % 2:
            raise InvalidGrid(f"n_points must be even and >= 8, got {n}")
        if not np.isfinite(self.side) or self.side <= 0:
            raise InvalidGrid(f"side must be positive, got {self.side}")

    @property
    def spacing(self):
        return self.side / self.n_points

    @property
    def dxi(self):
        """Wavenumber lattice spacing ``2 pi / side``."""
        return 2 * np.pi / self.side

    @property
    def shape(self):
        return (self.n_points, self.n_points)

    @property
    def spectral_shape(self):
        return (self.n_points, self.n_points // 2 + 1)

    @cached_property
    def k1(self):
        n = self.n_points
        return np.fft.fftfreq(n, 1.0 / n).round().astype(np.int64)[:, None]

    @cached_property
    def k2(self):
        return np.arange(self.n_points // 2 + 1, dtype=np.int64)[None, :]

    @cached_property
    def xi1(self):
        return self.k1 * self.dxi

    @cached_property
    def xi2(self):
        return self.k2 * self.dxi

    @cached_property
    def ksq(self):
        return self.xi1**2 + self.xi2**2

    @cached_property
    def retained(self):
        """False on the Nyquist row and column, which are always zero."""
        half = self.n_points // 2
        return (np.abs(self.k1) != half) & (self.k2 != half)

    @cached_property
    def dealias_mask(self):
        kmax = np.maximum(np.abs(self.k1), self.k2)
        return (3 * kmax <= self.n_points) & self.retained

    @cached_property
    def weights(self):
        """Multiplicity of each stored coefficient in sums over the full lattice."""
        half = self.n_points // 2
        w = np.where((self.k2 == 0) | (self.k2 == half), 1.0, 2.0)
        return np.broadcast_to(w, self.spectral_shape)

    def coords(self):
        x = np.arange(self.n_points) * self.spacing
        return np.meshgrid(x, x, indexing="ij")

    def multiplier(self, alpha):
        """Symbol ``(i xi1)^a1 (i xi2)^a2`` of ``D^alpha`` with the Nyquist modes removed."""
        a1, a2 = alpha
        return (1j * self.xi1) ** a1 * (1j * self.xi2) ** a2 * self.retained


def make_grid(n_points, side):
    if isinstance(n_points, np.integer):
        n_points = int(n_points)
    return Grid(n_points, float(side))


class _Spectral:
    """Arithmetic shared by scalar and vector spectral fields."""

    ncomp = 0

    def __init__(self, grid, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        expected = ((self.ncomp,) if self.ncomp else ()) + grid.spectral_shape
        if coeffs.shape != expected:
            raise ShapeMismatch(f"expected coefficient array {expected}, got {coeffs.shape}")
        self.grid = grid
        self.coeffs = coeffs

    def _wrap(self, coeffs):
        return type(self)(self.grid, coeffs)

    def _other(self, other):
        if isinstance(other, _Spectral):
            if other.grid != self.grid:
                raise GridMismatch("fields live on different grids")
            if other.ncomp != self.ncomp:
                raise ShapeMismatch("cannot combine scalar and vector fields")
            return other.coeffs
        return other

    def __add__(self, other):
        return self._wrap(self.coeffs + self._other(other))

    def __sub__(self, other):
        return self._wrap(self.coeffs - self._other(other))

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, _Spectral):
            return NotImplemented
        return self._wrap(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._wrap(self.coeffs / scalar)

    def copy(self):
        return self._wrap(self.coeffs.copy())

    def values(self):
        """Physical-space values as a plain array."""
        return irfft(self.coeffs, self.grid.n_points)

    def full_coeffs(self):
        """Coefficients on the whole lattice, shape ``(..., n, n)`` in fft order."""
        n = self.grid.n_points
        full = np.zeros(self.coeffs.shape[:-1] + (n,), dtype=np.complex128)
        full[..., : n // 2 + 1] = self.coeffs
        kk2 = np.arange(1, n // 2)
        neg1 = (-self.grid.k1[:, 0]) % n
        full[..., n - kk2] = np.conj(self.coeffs[..., neg1, :][..., kk2])
        return full

    def coefficient(self, k1, k2):
        """Coefficient ``c_k`` at integer lattice index ``(k1, k2)``."""
        if k2 < 0:
            return np.conj(self.coefficient(-k1, -k2))
        return self.coeffs[..., k1 % self.grid.n_points, k2]

    def is_finite(self):
        return bool(np.all(np.isfinite(self.coeffs)))


class SpectralField(_Spectral):
    """Scalar field held by its Fourier-series coefficients."""

    ncomp = 0

    def __repr__(self):
        return f"SpectralField(n={self.grid.n_points}, side={self.grid.side:g})"


class VectorField(_Spectral):
    """Two-component field; ``coeffs`` has shape ``(2, n, n // 2 + 1)``."""

    ncomp = 2

    def __getitem__(self, i):
        return SpectralField(self.grid, self.coeffs[i])

    @classmethod
    def from_components(cls, first, second):
        if first.grid != second.grid:
            raise GridMismatch("components live on different grids")
        return cls(first.grid, np.stack([first.coeffs, second.coeffs]))

    def is_divergence_free(self, rtol=1e-10):
        from .norms import hs_norm

        return hs_norm(div(self), 0) <= rtol * hs_norm(self, 0)

    def __repr__(self):
        return f"VectorField(n={self.grid.n_points}, side={self.grid.side:g})"


class RealField:
    """Values on the collocation points; scalar ``(n, n)`` or vector ``(2, n, n)``."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape[-2:] != grid.shape or values.ndim not in (2, 3):
            raise ShapeMismatch(f"expected values of shape {grid.shape}, got {values.shape}")
        if values.ndim == 3 and values.shape[0] != 2:
            raise ShapeMismatch("vector values need a leading axis of length 2")
        if not np.all(np.isfinite(values)):
            raise NonFinite("field contains NaN or Inf")
        self.grid = grid
        self.values = values


def zeros(grid, vector=False):
    cls = VectorField if vector else SpectralField
    shape = ((2,) if vector else ()) + grid.spectral_shape
    return cls(grid, np.zeros(shape, dtype=np.complex128))


def _wrap_coeffs(grid, coeffs):
    if coeffs.ndim == 3:
        return VectorField(grid, coeffs)
    return SpectralField(grid, coeffs)


def forward(field):
    """Transform physical values to coefficients; Nyquist modes are dropped."""
    if not isinstance(field, RealField):
        raise ShapeMismatch("forward expects a RealField")
    coeffs = rfft(field.values) * field.grid.retained
    return _wrap_coeffs(field.grid, coeffs)


def inverse(field):
    return RealField(field.grid, field.values())


def derivative(field, alpha):
    """Apply ``D^alpha`` componentwise."""
    a1, a2 = alpha
    if a1 < 0 or a2 < 0:
        raise ValueError(f"multi-index must be non-negative, got {alpha}")
    return field._wrap(field.coeffs * field.grid.multiplier(alpha))


def dealias(field):
    """Two-thirds rule: zero every mode with ``max(|k1|, |k2|) > n / 3``."""
    return field._wrap(field.coeffs * field.grid.dealias_mask)


def grad(f):
    g = f.grid
    return VectorField(g, np.stack([f.coeffs * g.multiplier((1, 0)), f.coeffs * g.multiplier((0, 1))]))


def div(v):
    g = v.grid
    return SpectralField(g, v.coeffs[0] * g.multiplier((1, 0)) + v.coeffs[1] * g.multiplier((0, 1)))


def laplacian(field):
    return field._wrap(-field.grid.ksq * field.coeffs * field.grid.retained)


def perp_grad(a):
    """``(d2 a, -d1 a)``, a divergence-free field built from a stream function."""
    g = a.grid
    return VectorField(g, np.stack([a.coeffs * g.multiplier((0, 1)), -a.coeffs * g.multiplier((1, 0))]))


def project_coeffs(grid, vc):
    """Leray projection on a raw ``(2, ...)`` coefficient array."""
    ksq = np.where(grid.ksq == 0, 1.0, grid.ksq)
    dot = (grid.xi1 * vc[0] + grid.xi2 * vc[1]) / ksq
    return np.stack([vc[0] - grid.xi1 * dot, vc[1] - grid.xi2 * dot])


def leray_project(v):
    """Mode-wise projection ``I - xi xi^T / |xi|^2`` onto divergence-free fields; k = 0 is kept."""
    return VectorField(v.grid, project_coeffs(v.grid, v.coeffs))


def product(f, g):
    """Dealiased pseudospectral product of two scalar fields."""
    if f.grid != g.grid:
        raise GridMismatch("fields live on different grids")
    out = rfft(f.values() * g.values()) * f.grid.dealias_mask
    return SpectralField(f.grid, out)


def from_modes(grid, modes):
    """Real field ``sum_k (z_k e^{i xi_k.x} + conj(z_k) e^{-i xi_k.x})`` from ``{(k1, k2): z_k}``.

    The entry at ``(0, 0)`` contributes its real part once. ``{(1, 0): 0.5}`` is ``cos(x1)``
    on a side-2pi grid and ``{(1, 0): -0.5j}`` is ``sin(x1)``.
    """
    n = grid.n_points
    c = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for (k1, k2), z in modes.items():
        if abs(k1) >= n // 2 or abs(k2) >= n // 2:
            raise ValueError(f"mode {(k1, k2)} is not representable on an {n}-point grid")
        if k1 == 0 and k2 == 0:
            c[0, 0] += np.real(z)
            continue
        if k2 < 0 or (k2 == 0 and k1 < 0):
            k1, k2, z = -k1, -k2, np.conj(z)
        c[k1 % n, k2] += z
        if k2 == 0:
            c[(-k1) % n, 0] += np.conj(z)
    return SpectralField(grid, c)
