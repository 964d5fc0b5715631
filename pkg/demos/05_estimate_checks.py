"""
Executable a priori estimates
=============================

Barrier supersolutions, the implicit Groenwall threshold, the Hoelder
supersolution ODE and the interpolation inequalities, each reported as a
pass/fail record with a margin.
"""
import math

import numpy as np

from landau import PhaseGrid, make_maxwellian
from landau.verification import (barrier_fit, gbar_blowup_closed_form, gbar_blowup_quadrature,
                                 gronwall_equality_branch, gronwall_equality_lambertw, gronwall_threshold,
                                 interpolation_inequality_checks, solve_gbar)

# smallest beta making e^{beta t}<v>^{-6} a supersolution, and beta / K
for n in (16, 32):
    fit = barrier_fit(make_maxwellian(PhaseGrid.create(n, 5.0)), -1.0, 6.0)
    print(f"n_v={n}: beta* = {fit['beta_star']:.3f}, K = {fit['K']:.3f}, C0 = {fit['C0']:.3f}")

# H = A exp(B t H) on its lower branch stays below eA up to t = 1/(eAB)
A, B = 2.0, 0.7
t = np.linspace(0, 1 / (math.e * A * B), 9)
H = gronwall_equality_branch(A, B, t)
print("max |Newton - Lambert W|:", float(np.max(np.abs(H - gronwall_equality_lambertw(A, B, t)))))
print("threshold check:", gronwall_threshold(A, B, t, H).to_json())

# three routes to the blow-up time of G' = N t^{-1+theta} (1+G)^P
print("blow-up times:", solve_gbar(1.0, 0.5, 2.0).blowup_time, gbar_blowup_quadrature(1.0, 0.5, 2.0),
      gbar_blowup_closed_form(1.0, 0.5, 2.0))

for r in interpolation_inequality_checks()[:4]:
    print(f"{r.name:28s} pass={r.passed}  margin={r.margin:.3f}")
