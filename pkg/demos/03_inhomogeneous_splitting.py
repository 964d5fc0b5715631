"""
Free transport plus collisions
==============================

With one periodic space dimension the solver alternates exact free
transport with the collision step.  Halving dt shows second-order
convergence of the symmetric splitting and first order of the plain one.
"""
import numpy as np

from landau import CollisionKernel, DistributionField, PhaseGrid, SolverConfig
from landau.coefficients import compute_coefficients_fast
from landau.solver import stable_dt, strang_step

grid = PhaseGrid.create(n_v=8, l_v=4.0, dim_x=1, n_x=8, l_x=2.0)
v = grid.velocity.v
x = grid.space.positions()[..., 0]
fv = sum(np.exp(-np.sum((v - c) ** 2, axis=-1) / 0.98) for c in ([-0.8, 0.3, 0], [0.8, 0, 0]))
f0 = DistributionField(grid, fv[None] * (1 + 0.5 * np.cos(np.pi * x))[:, None, None, None])

coeff = compute_coefficients_fast(f0.values, grid.velocity, CollisionKernel(-1.0))
T = 0.012
dt0 = T / int(np.ceil(T / (0.8 * stable_dt(coeff, grid.velocity.h))))


def run(splitting, m):
    dt = dt0 / m
    cfg = SolverConfig(gamma=-1.0, dt=dt, t_end=T, splitting=splitting, collision_integrator="rk2",
                       interpolation="spectral", positivity="off")
    f = f0
    for _ in range(int(round(T / dt))):
        f = strang_step(f, dt, cfg)
    return f.values


for splitting in ("strang", "lie"):
    ref = run(splitting, 8)
    e1, e2 = (np.max(np.abs(run(splitting, m) - ref)) for m in (1, 2))
    print(f"{splitting:6s} error dt: {e1:.3e}  dt/2: {e2:.3e}  ratio {e1 / e2:.2f}")
