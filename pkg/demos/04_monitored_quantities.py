"""
Monitored quantities
====================

Continuation functionals, Hoelder quotients, Schauder exponents and the
kinetic change of variables, evaluated on simple fields.
"""
import numpy as np

from landau import DistributionField, PhaseGrid, PhasePoint, make_maxwellian
from landau.diagnostics import (build_kinetic_transform, holder_seminorm, lower_bound_envelope_fit, psi,
                                psi_tilde, schauder_exponents)

grid = PhaseGrid.create(24, 5.0)
mu = make_maxwellian(grid)

# for gamma in (-2, 0) Psi is the weighted L^1 mass, 5/2 pi^{3/2} for this Maxwellian
print("Psi at gamma=-1:", psi([mu], -1.0)[0], " expected", 2.5 * np.pi ** 1.5)
print("Psi, Psi-tilde at gamma=-2.5:", psi([mu], -2.5)[0], psi_tilde([mu], -2.5, ell_choice=3.3)[0])

# a step function is not Hoelder: its quotient grows like h^{-alpha}
for n in (8, 16, 32):
    g = PhaseGrid.create(n, 2.0)
    step = DistributionField(g, (g.velocity.v[None, ..., 0] > 0).astype(float))
    print(f"n_v={n:2d}  step quotient {holder_seminorm(step, 0.5, max_sep=0.5).seminorm_value:.3f}")

s = schauder_exponents(alpha=0.5, gamma=-2.0, k=30.0, m=10.0)
print(f"p(1/2) = {s.p_alpha:.4f}, time exponent = {s.time_exponent:.5f}, q = {s.q:.4f}")

T = build_kinetic_transform(PhasePoint.of(1.0, (0.0, 0.0, 0.0), (4.0, 0.0, 0.0)), -1.0)
print("S eigenvalues at v0 = (4, 0, 0):", np.round(np.linalg.eigvalsh(T.S), 4), " r1 =", round(T.r1, 4))

fit = lower_bound_envelope_fit(mu, -2.0)
print(f"lower envelope c1 = {fit.c1:.4f}, binding at |v| = {fit.binding_speed:.3f}")
