"""Pseudospectral simulator for the 2D tropical climate model without thermal diffusion."""

from .diagnostics import (
    DiagnosticsRow,
    DiagnosticsSink,
    GronwallEnvelope,
    decay_verdict,
    gronwall_monitor,
    sample,
)
from .dynamics import PerturbationState, TCMState, compute_pressure, rhs_full, rhs_perturbation
from .errors import *  # noqa: F401,F403
from .grid import Grid, RealField, SpectralField, VectorField, make_grid
from .harness import RunConfig, emit_config, parse_config, run, sweep, verify
from .initial_data import (
    ConeSpec,
    InitialCondition,
    LinearData,
    assemble_initial,
    build_bump_chi,
    build_remark_data,
    condition_lhs,
)
from .integrator import StepperConfig, Trajectory, integrate, step
from .linear import LinearFlow, decay_envelope, evolve_linear, forcing_factored, forcing_raw
from .norms import hs_norm, l2_norm, linf_norm, spectral_l1, winf_norm

__version__ = "0.1.0"
