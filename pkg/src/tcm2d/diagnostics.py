"""Per-sample energy diagnostics and the Gronwall-shaped monitor built on them."""

from __future__ import annotations

import math
import threading
from dataclasses import astuple, dataclass, fields

import numpy as np

from .dynamics import _same_time
from .errors import InsufficientSamples, NonFinite, TimeMismatch
from .grid import SpectralField, VectorField, irfft
from .norms import (
    crossing_term,
    derivative_tensor_linf,
    energy_A,
    energy_B,
    forcing_size,
    winf_norm,
)

CSV_COLUMNS = ("t", "A", "B", "E", "crossing", "l2_energy", "energy_residual", "max_linf")
DEFAULT_GAMMA = 0.1


@dataclass(frozen=True)
class DiagnosticsRow:
    """One time sample.

    ``linear_winf`` is ``||U, V||_{W^{4,inf}}`` and ``linear_v3`` is
    ``||V||_inf + ||grad^3 V||_inf``, both from the closed-form flow; they feed the
    Gronwall envelope and are not written to the CSV.
    """

    t: float
    A: float
    B: float
    E: float
    crossing: float
    l2_energy: float
    energy_residual: float
    max_linf: float
    condition_lhs_at_C: float = 0.0
    linear_winf: float = 0.0
    linear_v3: float = 0.0

    def csv_values(self):
        return tuple(getattr(self, name) for name in CSV_COLUMNS)

    def is_finite(self):
        return all(math.isfinite(x) for x in astuple(self))


class DiagnosticsSink:
    """Append-only row store; appends are serialised so concurrent writers stay ordered."""

    def __init__(self):
        self._rows = []
        self._lock = threading.Lock()

    def append(self, row):
        with self._lock:
            if self._rows and row.t <= self._rows[-1].t:
                raise ValueError(f"rows must have increasing t; got {row.t} after {self._rows[-1].t}")
            self._rows.append(row)

    @property
    def rows(self):
        with self._lock:
            return list(self._rows)

    def __len__(self):
        return len(self._rows)


def _linear_norms(flow):
    U, V = flow.U, flow.V
    lin_winf = winf_norm(U, 4) + winf_norm(V, 4)
    lin_v3 = derivative_tensor_linf(V, 0) + derivative_tensor_linf(V, 3)
    return lin_winf, lin_v3


def _max_linf(grid, Y):
    vals = irfft(Y, grid.n_points)
    u = np.sqrt(vals[0] ** 2 + vals[1] ** 2).max()
    v = np.sqrt(vals[2] ** 2 + vals[3] ** 2).max()
    return float(max(u, v, np.abs(vals[4]).max()))


def sample_arrays(grid, P, Y, flow, trip, residual=0.0, condition_value=0.0, mu=1.0, nu=1.0):
    """Row from packed perturbation ``P`` and packed full state ``Y``."""
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Y))):
        raise NonFinite("state contains NaN or Inf")
    w, c = VectorField(grid, P[0:2]), VectorField(grid, P[2:4])
    theta = SpectralField(grid, P[4])
    sq = grid.weights * (Y.real**2 + Y.imag**2)
    lin_winf, lin_v3 = _linear_norms(flow)
    row = DiagnosticsRow(
        t=float(flow.t),
        A=energy_A(w, c, theta),
        B=energy_B(w, c, theta),
        E=forcing_size(trip.f, trip.g, trip.h),
        crossing=crossing_term(c, theta),
        l2_energy=0.5 * grid.side**2 * float(np.sum(sq)),
        energy_residual=float(residual),
        max_linf=_max_linf(grid, Y),
        condition_lhs_at_C=float(condition_value),
        linear_winf=lin_winf,
        linear_v3=lin_v3,
    )
    if not row.is_finite():
        raise NonFinite(f"non-finite diagnostics at t={row.t}")
    return row


def sample(p, flow, forcing, residual=0.0, condition_value=0.0):
    """Row for a ``PerturbationState`` with the matching closed-form flow and forcing."""
    if not (_same_time(p.t, flow.t) and _same_time(p.t, forcing.t)):
        raise TimeMismatch(f"state at t={p.t}, flow at t={flow.t}, forcing at t={forcing.t}")
    grid = p.grid
    P = p.pack()
    lin = np.concatenate([flow.U.coeffs, flow.V.coeffs, np.zeros((1,) + grid.spectral_shape)])
    return sample_arrays(grid, P, P + lin, flow, forcing, residual, condition_value, flow.mu, flow.nu)


def _cumtrapz(t, y):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))
    return out


@dataclass(frozen=True)
class GronwallEnvelope:
    C_fit: float
    times: np.ndarray
    envelope: np.ndarray
    A: np.ndarray
    verdict: bool
    minimal_C: float

    @property
    def margin(self):
        """Smallest ``envelope - A`` over the samples."""
        return float(np.min(self.envelope - self.A))


def _columns(rows):
    t = np.array([r.t for r in rows])
    if np.any(np.diff(t) <= 0):
        raise ValueError("rows must have strictly increasing t")
    A = np.array([r.A for r in rows])
    E = np.array([r.E for r in rows])
    rate = np.array([r.linear_winf + r.linear_v3**2 for r in rows]) + E
    return t, A, _cumtrapz(t, E), _cumtrapz(t, rate)


def envelope_values(rows, C):
    """``C (A0 + int E) exp{C int (||U,V||_{W^{4,inf}} + ||V, grad^3 V||_inf^2 + E)}``."""
    t, A, intE, intR = _columns(rows)
    with np.errstate(over="ignore"):
        return C * (A[0] + intE) * np.exp(C * intR)


def _holds(A, env):
    return bool(np.all(A <= env))


def minimal_constant(rows, lo=0.1, hi=100.0, rtol=0.01):
    """Smallest ``C`` in ``[lo, hi]`` (to ``rtol``) for which the envelope dominates ``A``.

    Returns ``lo`` if it already holds there and ``inf`` if it fails at ``hi``. The
    envelope is increasing in ``C``, so bisection (in log space) applies.
    """
    A = np.array([r.A for r in rows])
    if _holds(A, envelope_values(rows, lo)):
        return lo
    if not _holds(A, envelope_values(rows, hi)):
        return math.inf
    a, b = math.log(lo), math.log(hi)
    while b - a > math.log1p(rtol):
        mid = 0.5 * (a + b)
        if _holds(A, envelope_values(rows, math.exp(mid))):
            b = mid
        else:
            a = mid
    return math.exp(b)


def gronwall_monitor(rows, C_fit=None):
    """Envelope at ``C_fit`` (the minimal constant when ``None``) with its verdict."""
    rows = list(rows)
    if len(rows) < 2:
        raise InsufficientSamples(f"need at least 2 rows, got {len(rows)}")
    minimal = minimal_constant(rows)
    C = minimal if C_fit is None else float(C_fit)
    if not C > 0:
        raise ValueError(f"C_fit must be positive, got {C}")
    t, A, _, _ = _columns(rows)
    env = envelope_values(rows, C) if math.isfinite(C) else np.full_like(A, math.inf)
    return GronwallEnvelope(C, t, env, A, _holds(A, env), minimal)


@dataclass(frozen=True)
class DecayReport:
    verdict: bool
    early_sup: float
    late_sup: float
    termination: str


def decay_verdict(rows, termination="completed"):
    """No blow-up flag and ``sup A`` over the last quarter of samples at most that over the first."""
    rows = list(rows)
    if not rows:
        return DecayReport(termination == "completed", 0.0, 0.0, termination)
    q = max(1, len(rows) // 4)
    early = max(r.A for r in rows[:q])
    late = max(r.A for r in rows[-q:])
    return DecayReport(termination == "completed" and late <= early, early, late, termination)


def crossing_dominated(rows, gamma=DEFAULT_GAMMA):
    """Row-wise ``|gamma * crossing| <= A / 2``."""
    return all(abs(gamma * r.crossing) <= 0.5 * r.A for r in rows)


def row_field_names():
    return [f.name for f in fields(DiagnosticsRow)]
