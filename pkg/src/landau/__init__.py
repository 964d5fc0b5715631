"""Deterministic solver and estimate-verification toolkit for the Landau equation with soft potentials."""
from .coefficients import (CoefficientField, CollisionKernel, compute_coefficients, compute_coefficients_direct,
                           compute_coefficients_fast, divergence_identity_residuals, ellipticity_spectrum)
from .diagnostics import (holder_seminorm, hydrodynamic_fields, psi, psi_tilde, schauder_exponents,
                          build_kinetic_transform, lower_bound_envelope_fit)
from .grid import (DistributionField, PhaseGrid, PhasePoint, SpatialGrid, TrajectoryRecord, VelocityGrid,
                   WellDistributedParams, kinetic_distance, load_snapshot, make_maxwellian, save_snapshot,
                   weighted_lp_norm, weighted_sup_norm, well_distributed_check)
from .solver import (ConfigError, InstabilityError, SolverConfig, collision_step, mollify_initial_data,
                     run_simulation, strang_step, transport_step)

__version__ = "0.1.0"
