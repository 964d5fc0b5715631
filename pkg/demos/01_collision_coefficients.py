"""
Nonlocal collision coefficients
===============================

The diffusion matrix a, drift b and reaction c are velocity convolutions of
f with power-law kernels.  They are computed here two ways, by zero-padded
FFT and by dense pair summation, and compared.
"""
import numpy as np

from landau import CollisionKernel, PhaseGrid, make_maxwellian
from landau.coefficients import (compute_coefficients_direct, compute_coefficients_fast,
                                 divergence_identity_residuals, ellipticity_spectrum)

grid = PhaseGrid.create(n_v=12, l_v=4.0)
f = make_maxwellian(grid)

# FFT against direct sum, for a moderately soft and for the Coulomb kernel
for gamma in (-1.0, -3.0):
    kernel = CollisionKernel(gamma)
    fast = compute_coefficients_fast(f.values, grid.velocity, kernel)
    slow = compute_coefficients_direct(f.values, grid.velocity, kernel)
    err = max(np.max(np.abs(x - y)) / np.max(np.abs(y)) for x, y in ((fast.a, slow.a), (fast.b, slow.b)))
    print(f"gamma={gamma:+.1f}  max relative difference fast vs direct: {err:.2e}")

# b = -div a and c = div b hold up to the finite-difference error,
# which shrinks like h^2
for n in (16, 32):
    g = PhaseGrid.create(n, 5.0)
    coeff = compute_coefficients_fast(make_maxwellian(g).values, g.velocity, CollisionKernel(-1.0))
    rb, rc = divergence_identity_residuals(coeff)
    print(f"n_v={n:2d}  |b + div a| = {rb:.3e}   |c - div b| = {rc:.3e}")

# a is positive definite; its eigenvalues split along v and across it
coeff = compute_coefficients_fast(f.values, grid.velocity, CollisionKernel(-1.0))
spec = ellipticity_spectrum(coeff)
print("smallest eigenvalue of a:", float(spec.lam_min.min()), " all PSD:", bool(spec.psd_ok))
