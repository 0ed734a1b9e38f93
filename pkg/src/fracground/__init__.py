"""Ground states of (-Delta)^s u = g(u) with critical growth on a periodic grid."""
from .bubble import (BubbleScanResult, bubble_scan, cutoff_bubble, gamma_eps, m_bounds_check, normalized_bubble,
                     talenti_bubble)
from .errors import (CapacityError, ConstraintError, CrossingNotFound, DomainError, FracgroundError, GeometryError,
                     NumericError, ParameterError, ResolutionError, SnapshotError, TruncationWarning)
from .fractional import (NormalizationCalibration, apply_fractional_laplacian, calibrate_normalization,
                         kinetic_energy, seminorm_sq_direct, seminorm_sq_spectral)
from .grid import (Field, Grid, dilate, embed, inner, load_snapshot, lp_norm, make_grid, refine, save_snapshot,
                   symmetric_decreasing_rearrangement, tail_mass)
from .identities import (GeometryEstimate, H_functional, J_functional, PathProfile, dilation_path_profile,
                         least_energy_from_M, mountain_pass_geometry, path_crossing_t0, pohozaev_residual,
                         rho0_for_H)
from .nonlinearity import (ModelNonlinearity, ProblemParams, energy, euler_lagrange_residual, potential_energy,
                           validate_params)
from .solver import GroundStateResult, SolverConfig, minimize_M, phi_map, project_to_constraint, solve_ground_state

__version__ = "0.1.0"
