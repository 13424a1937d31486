"""Run configuration, single runs, epsilon sweeps, the oracle suite and file output.

Config files are flat TOML documents whose keys are the ``RunConfig`` field names.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .diagnostics import CSV_COLUMNS, DiagnosticsSink, decay_verdict, gronwall_monitor
from .errors import ParseError, TCMError, UnresolvedCone, ValidationError
from .grid import irfft, make_grid
from .initial_data import (
    ConeSpec,
    LinearData,
    assemble_initial,
    build_bump_chi,
    build_remark_data,
    condition_lhs,
    random_band_limited,
    random_solenoidal,
)
from .integrator import StepperConfig, integrate, state_h3_norm
from .linear import evolve_linear, forcing_factored, forcing_raw, sup_scaled_forcing
from .norms import hs_norm, l2_norm

log = logging.getLogger(__name__)

REQUIRED = ("n_points", "side", "epsilon", "dt", "t_end")
SNAPSHOT_FIELDS = ("u1", "u2", "v1", "v2", "theta")
EXIT_COMPLETED, EXIT_ERROR, EXIT_BLOWUP = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    n_points: int
    side: float
    epsilon: float
    dt: float
    t_end: float
    amplitude_mode: str = "remark11"
    amplitude: float = 0.0
    w0_amplitude: float = 0.0
    c0_amplitude: float = 0.0
    theta0_amplitude: float = 0.0
    seed: int = 0
    mu: float = 1.0
    nu: float = 1.0
    sample_interval: float = 0.25
    blowup_threshold: float = 1e6
    C_for_condition: float = 1.0
    gamma: float = 0.1
    formulation: str = "perturbation"
    output_dir: str = "out"

    def validate(self):
        """Raise ``ValidationError`` naming the first violated field."""
        checks = [
            ("n_points", self.n_points >= 8 and self.n_points % 2 == 0, "must be an even integer >= 8"),
            ("side", self.side > 0 and math.isfinite(self.side), "must be positive"),
            ("epsilon", self.epsilon > 0, "must be positive"),
            ("amplitude_mode", self.amplitude_mode in ("remark11", "explicit"), "must be remark11 or explicit"),
            (
                "epsilon",
                self.amplitude_mode != "remark11" or self.epsilon < math.exp(-1),
                "must be below 1/e for remark11 amplitudes",
            ),
            ("mu", self.mu > 0, "must be positive"),
            ("nu", self.nu > 0, "must be positive"),
            ("dt", self.dt > 0, "must be positive"),
            ("t_end", self.t_end >= self.dt, "must be at least dt"),
            ("sample_interval", self.sample_interval > 0, "must be positive"),
            ("blowup_threshold", self.blowup_threshold > 0, "must be positive"),
            ("C_for_condition", self.C_for_condition > 0, "must be positive"),
            ("formulation", self.formulation in ("full", "perturbation"), "must be full or perturbation"),
        ]
        for name in ("w0_amplitude", "c0_amplitude", "theta0_amplitude"):
            checks.append((name, getattr(self, name) >= 0, "must be non-negative"))
        for name, ok, msg in checks:
            if not ok:
                raise ValidationError(name, f"{name}={getattr(self, name)!r} {msg}")
        grid = self.grid
        if grid.dxi > self.epsilon / 2 * (1 + 1e-12):
            raise ValidationError("side", f"2 pi / side = {grid.dxi:.6g} exceeds epsilon / 2 = {self.epsilon / 2:.6g}")
        try:
            ConeSpec(self.epsilon).check_resolved(grid)
        except UnresolvedCone as exc:
            raise ValidationError("n_points", str(exc)) from exc
        return self

    @property
    def grid(self):
        return make_grid(self.n_points, self.side)

    @property
    def output_path(self):
        return Path(self.output_dir)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, value):
    kind = _TYPES[key]
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"key {key!r} must be an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"key {key!r} must be a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ParseError(f"key {key!r} must be a string, got {value!r}")
    return value


def config_from_mapping(doc):
    unknown = sorted(set(doc) - set(_TYPES))
    if unknown:
        raise ParseError(f"unknown key(s): {', '.join(unknown)}")
    for key in REQUIRED:
        if key not in doc:
            raise ParseError(f"missing required key {key!r}")
    return RunConfig(**{k: _coerce(k, v) for k, v in doc.items()}).validate()


def parse_config(path):
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"malformed config {path}: {exc}") from exc
    return config_from_mapping(doc)


def emit_config(config):
    """Flat TOML text that ``parse_config`` reads back to an equal ``RunConfig``."""
    return tomli_w.dumps(asdict(config))


def _scaled(f, amplitude):
    size = l2_norm(f)
    return f * (amplitude / size) if size > 0 and amplitude > 0 else f * 0.0


def build_initial(config):
    """Linear data plus seeded random perturbations of the requested L^2 sizes."""
    grid = config.grid
    cone = ConeSpec(config.epsilon)
    if config.amplitude_mode == "remark11":
        data = build_remark_data(cone, grid)
    else:
        chi = build_bump_chi(cone, grid)
        data = LinearData(config.amplitude * chi, config.amplitude * chi, cone)
    rng = np.random.default_rng(config.seed)
    kmax = max(1, config.n_points // 8)
    w0 = _scaled(random_solenoidal(grid, rng, kmax, decay=4), config.w0_amplitude)
    c0 = _scaled(random_band_limited(grid, rng, kmax, vector=True, decay=4), config.c0_amplitude)
    theta0 = _scaled(random_band_limited(grid, rng, kmax, decay=4), config.theta0_amplitude)
    return assemble_initial(data, w0, c0, theta0)


def stepper_config(config, **overrides):
    kw = dict(
        dt=config.dt,
        t_end=config.t_end,
        blowup_threshold=config.blowup_threshold,
        formulation=config.formulation,
        sample_interval=config.sample_interval,
    )
    kw.update(overrides)
    return StepperConfig(**kw)


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(CSV_COLUMNS)
        for row in rows:
            out.writerow(["%.17g" % x for x in row.csv_values()])


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[float(x) for x in line] for line in reader]


def full_state_array(trajectory, ic, mu=1.0, nu=1.0):
    """Packed coefficients of ``(u, v, theta)`` at the end of a run."""
    state = trajectory.final_state
    X = state.pack()
    if hasattr(state, "w"):
        flow = evolve_linear(ic.linear, state.t, mu, nu)
        X = X.copy()
        X[0:2] += flow.U.coeffs
        X[2:4] += flow.V.coeffs
    return X


def write_snapshot(path, grid, X, t, mu, nu):
    vals = irfft(X, grid.n_points)
    with open(path, "wb") as fh:
        fh.write(f"TCM1 {grid.n_points} {grid.side!r} {t!r} {mu!r} {nu!r}\n".encode("ascii"))
        for name, arr in zip(SNAPSHOT_FIELDS, vals):
            fh.write(f"{name}\n".encode("ascii"))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path):
    """``(header dict, {name: (n, n) array})``."""
    with open(path, "rb") as fh:
        head = fh.readline().decode("ascii").split()
        if not head or head[0] != "TCM1":
            raise ParseError(f"{path} is not a TCM1 snapshot")
        n = int(head[1])
        meta = dict(n=n, side=float(head[2]), t=float(head[3]), mu=float(head[4]), nu=float(head[5]))
        arrays = {}
        for _ in SNAPSHOT_FIELDS:
            name = fh.readline().decode("ascii").strip()
            arrays[name] = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
    return meta, arrays


def cfl_number(grid, X, dt):
    """Advisory ``dt * max|xi| * max|u|``."""
    vals = irfft(X[0:2], grid.n_points)
    return float(dt * np.sqrt(grid.ksq.max()) * np.sqrt((vals**2).sum(axis=0)).max())


@dataclass
class RunResult:
    exit_code: int
    termination: str
    rows: list = field(default_factory=list)
    manifest: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)
    error: str = ""


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else str(float(x))
    return x


def execute(config, write=True):
    """Integrate one configuration and (optionally) write its three artifacts."""
    grid = config.grid
    ic = build_initial(config)
    lhs = condition_lhs(ic, config.C_for_condition)
    sink = DiagnosticsSink()
    traj = integrate(ic, stepper_config(config), sink, config.mu, config.nu, condition_value=lhs)
    rows = sink.rows
    decay = decay_verdict(rows, traj.termination)
    manifest = {
        "config": asdict(config),
        "termination": traj.termination,
        "final_time": traj.final_time,
        "message": traj.message,
        "condition_lhs": lhs,
        "decay_verdict": decay.verdict,
        "decay_early_sup": decay.early_sup,
        "decay_late_sup": decay.late_sup,
        "crossing_dominated": all(abs(config.gamma * r.crossing) <= 0.5 * r.A for r in rows),
    }
    X = full_state_array(traj, ic, config.mu, config.nu)
    manifest["cfl_advisory"] = cfl_number(grid, X, config.dt)
    if len(rows) >= 2:
        gm = gronwall_monitor(rows)
        manifest.update(gronwall_verdict=gm.verdict, gronwall_minimal_C=gm.minimal_C)
    manifest = {k: _jsonable(v) for k, v in manifest.items()}
    code = EXIT_COMPLETED if traj.termination == "completed" else EXIT_BLOWUP
    if traj.termination == "nonfinite":
        code = EXIT_ERROR
    result = RunResult(code, traj.termination, rows, manifest)
    if write:
        out = config.output_path
        try:
            out.mkdir(parents=True, exist_ok=True)
            paths = {
                "csv": out / "diagnostics.csv",
                "snapshot": out / "snapshot.tcm1",
                "manifest": out / "manifest.json",
            }
            write_csv(rows, paths["csv"])
            write_snapshot(paths["snapshot"], grid, X, traj.final_time, config.mu, config.nu)
            paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise OSError(f"writing run artifacts under {out}: {exc}") from exc
        result.paths = {k: str(v) for k, v in paths.items()}
    return result


def run(config):
    """``execute`` with errors folded into exit code 1."""
    try:
        return execute(config)
    except (TCMError, OSError, FloatingPointError, ValueError) as exc:
        log.error("run failed: %s", exc)
        return RunResult(EXIT_ERROR, "error", error=str(exc))


SWEEP_COLUMNS = ("epsilon", "condition_lhs", "sup_scaled_E", "decay_verdict", "termination", "exit_code", "error")


def _dedup(epsilons):
    seen, out = set(), []
    for eps in epsilons:
        if eps in seen:
            warnings.warn(f"duplicate epsilon {eps} dropped", stacklevel=3)
            continue
        seen.add(eps)
        out.append(eps)
    return out


def _sweep_one(config, eps):
    row = dict(epsilon=eps, condition_lhs="", sup_scaled_E="", decay_verdict="", termination="error", exit_code=1, error="")
    try:
        sub = replace(config, epsilon=eps, output_dir=str(config.output_path / f"eps_{eps!r}")).validate()
        ic = build_initial(sub)
        row["sup_scaled_E"] = sup_scaled_forcing(ic.linear, t_max=5.0, mu=sub.mu, nu=sub.nu)
        res = execute(sub)
        row.update(
            condition_lhs=res.manifest["condition_lhs"],
            decay_verdict=res.manifest["decay_verdict"],
            termination=res.termination,
            exit_code=res.exit_code,
        )
    except (TCMError, OSError, FloatingPointError, ValueError) as exc:
        row["error"] = str(exc)
    return row


def sweep(config, epsilons, workers=None):
    """One run per distinct epsilon (concurrently); returns the summary rows, also written as CSV."""
    epsilons = _dedup([float(e) for e in epsilons])
    if epsilons:
        with ThreadPoolExecutor(max_workers=workers or min(4, len(epsilons))) as pool:
            rows = list(pool.map(lambda e: _sweep_one(config, e), epsilons))
    else:
        rows = []
    config.output_path.mkdir(parents=True, exist_ok=True)
    with open(config.output_path / "sweep_summary.csv", "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        out.writeheader()
        out.writerows(rows)
    return rows


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"


def verify(config, max_steps=20):
    """Oracle suite on the configured grid and data, with short runs of at most ``max_steps``."""
    grid = config.grid
    ic = build_initial(config)
    data = ic.linear
    t_short = min(config.t_end, max_steps * config.dt)
    checks = []

    # linearized run from the linear data alone reproduces the closed-form flow
    lin = integrate(
        assemble_initial(data),
        stepper_config(config, t_end=t_short, sample_interval=t_short, formulation="full", linearized=True),
        mu=config.mu,
        nu=config.nu,
    )
    flow = evolve_linear(data, lin.final_time, config.mu, config.nu)
    X = lin.final_state.pack()[:4]
    ref = np.concatenate([flow.U.coeffs, flow.V.coeffs])
    checks.append(CheckResult("linear-flow agreement", *_rel(np.abs(X - ref).max(), max(np.abs(ref).max(), 1e-300), 1e-8)))

    raw, fac = forcing_raw(flow), forcing_factored(flow)
    diff = hs_norm(raw.f - fac.f, 3) + hs_norm(raw.g - fac.g, 3) + hs_norm(raw.h - fac.h, 3)
    checks.append(CheckResult("raw-vs-factored forcing", *_rel(diff, max(fac.E, 1e-300), 1e-10)))

    runs = {}
    for form in ("full", "perturbation"):
        runs[form] = integrate(
            ic, stepper_config(config, t_end=t_short, sample_interval=t_short, formulation=form), mu=config.mu, nu=config.nu
        )
    Ya, Yb = (full_state_array(runs[f], ic, config.mu, config.nu) for f in ("full", "perturbation"))
    checks.append(
        CheckResult("two-path consistency", *_rel(state_h3_norm(grid, Ya - Yb), max(state_h3_norm(grid, Ya), 1e-300), 1e-6))
    )

    energy_run = integrate(
        ic, stepper_config(config, t_end=t_short, sample_interval=config.dt, formulation="full"), mu=config.mu, nu=config.nu
    )
    worst = max((abs(r.energy_residual) for r in energy_run.rows[1:]), default=0.0)
    # 1e-6 per unit time at dt = 1e-3; the residual is fourth order in dt
    tol = 1e-6 * max(1.0, config.dt / 1e-3) ** 4
    checks.append(CheckResult("energy law", worst, tol, worst <= tol))
    return checks


def _rel(err, scale, tol):
    value = err / scale
    return value, tol, bool(value <= tol)


__all__ = [
    "RunConfig",
    "RunResult",
    "CheckResult",
    "parse_config",
    "config_from_mapping",
    "emit_config",
    "build_initial",
    "execute",
    "run",
    "sweep",
    "verify",
    "write_csv",
    "read_csv",
    "write_snapshot",
    "read_snapshot",
]
