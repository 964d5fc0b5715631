"""
Weighted contraction between two runs
=====================================

W = 1/2 <v>^10 (e^{-int r} (g - f))^2 compares two computed solutions from
the same data.  Between runs with dt and dt/2 it shrinks with dt.
"""
import numpy as np

from landau import CollisionKernel, DistributionField, PhaseGrid, SolverConfig, run_simulation
from landau.coefficients import compute_coefficients_fast
from landau.solver import stable_dt
from landau.verification import contraction_series

grid = PhaseGrid.create(12, 4.0)
v = grid.velocity.v
f0 = DistributionField(grid, sum(np.exp(-np.sum((v - c) ** 2, axis=-1) / 0.72)
                                 for c in ([-1.0, 0, 0], [1.0, 0, 0]))[None])
coeff = compute_coefficients_fast(f0.values, grid.velocity, CollisionKernel(-1.0))
dt0 = 0.9 * stable_dt(coeff, grid.velocity.h)


def quiet(f, config, tracker, stats):
    return {"psi": 0.0}


runs = {m: run_simulation(f0, SolverConfig(gamma=-1.0, dt=dt0 / m, t_end=20 * dt0, diag_every=4 * m,
                                           positivity="off"), diagnostics=quiet) for m in (1, 2, 4)}
print("self-comparison sup W:", contraction_series(runs[1], runs[1], 0.5, 0.05)[1].max())
for m in (1, 2):
    _, W = contraction_series(runs[m], runs[2 * m], 0.5, 0.05)
    print(f"dt0/{m} vs dt0/{2 * m}: sup W = {W.max():.3e}")
