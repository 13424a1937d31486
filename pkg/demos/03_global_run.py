"""A global run from large cone data with zero perturbation.

The perturbation (w, c, theta) starts at zero and is driven only by the closed-form
forcing. We integrate to t = 10, then ask the diagnostics whether the energy A(t)
decayed and how small a constant the Gronwall-shaped envelope needs.
Pass an output directory to also write the diagnostics CSV.
"""

import sys
import time

from tcm2d.diagnostics import DiagnosticsSink, decay_verdict, gronwall_monitor, minimal_constant
from tcm2d.harness import write_csv
from tcm2d.initial_data import ConeSpec, assemble_initial, build_remark_data, resolving_grid
from tcm2d.integrator import StepperConfig, integrate

eps = 0.05
grid = resolving_grid(eps)
ic = assemble_initial(build_remark_data(ConeSpec(eps), grid))
sink = DiagnosticsSink()
start = time.perf_counter()
traj = integrate(ic, StepperConfig(dt=0.05, t_end=10.0, formulation="perturbation", sample_interval=0.5), sink)
print(f"eps={eps} on {grid.n_points}^2, termination={traj.termination}, {time.perf_counter() - start:.1f}s")

print("\n    t          A          E   max|u,v,theta|")
for row in sink.rows[::2]:
    print(f"{row.t:5.1f} {row.A:10.3e} {row.E:10.3e} {row.max_linf:12.4f}")

report = decay_verdict(sink.rows, traj.termination)
env = gronwall_monitor(sink.rows)
print(f"\ndecay verdict {report.verdict}: early sup A {report.early_sup:.3e}, late sup A {report.late_sup:.3e}")
print(f"Gronwall envelope holds with C = {env.minimal_C:g} (search floor); unfloored minimum {minimal_constant(sink.rows, lo=1e-8):.4f}")

if len(sys.argv) > 1:
    path = f"{sys.argv[1]}/diagnostics.csv"
    write_csv(sink.rows, path)
    print("wrote", path)
