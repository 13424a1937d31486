"""How accurate is the integrating-factor RK4 stepper?

Two self-checks on a free (no linear data) nonlinear run with O(1) random data:
the terminal error against a fine reference should fall 16x per halving of dt, and
the discrete L^2 energy balance should close to fourth order as well.
"""

import numpy as np

from tcm2d.grid import make_grid
from tcm2d.initial_data import ConeSpec, LinearData, assemble_initial, random_band_limited, random_solenoidal
from tcm2d.integrator import StepperConfig, integrate, state_h3_norm

grid = make_grid(32, 2 * np.pi)
rng = np.random.default_rng(1)
ic = assemble_initial(
    LinearData.zero(grid, ConeSpec(0.2)),
    random_solenoidal(grid, rng, 4, 0.3, decay=2),
    random_band_limited(grid, rng, 4, 0.3, vector=True, decay=2),
    random_band_limited(grid, rng, 4, 0.3, decay=2),
)
T = 0.5


def final(dt):
    return integrate(ic, StepperConfig(dt, T, formulation="full", sample_interval=T)).final_state.pack()


ref = final(T / 1600)
errors = {n: state_h3_norm(grid, final(T / n) - ref) for n in (50, 100, 200)}
print("steps   H3 error   ratio")
prev = None
for n, err in errors.items():
    print(f"{n:5d} {err:10.3e}   {'' if prev is None else f'{prev / err:5.2f}'}")
    prev = err

print("\n    dt     max energy residual")
for dt in (2e-3, 1e-3, 5e-4):
    rows = integrate(ic, StepperConfig(dt, 0.2, formulation="full")).rows
    print(f"{dt:7.0e} {max(abs(r.energy_residual) for r in rows[1:]):14.3e}")
