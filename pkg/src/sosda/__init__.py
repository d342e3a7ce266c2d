"""Sparse optimal scoring discriminant analysis.

High-dimensional linear discriminant analysis through the optimal scoring
formulation with an elastic-net penalty: a block-coordinate-descent driver
with exact scoring updates, inner subproblem solvers (proximal gradient,
accelerated proximal gradient, each with optional backtracking, and ADMM),
structure-aware regularizers, synthetic Gaussian benchmarks, and
cross-validation over an automatic l1-weight grid.
"""

from .classify import ProjectedData, evaluate, fit_centroids, predict, project
from .core import (CenteredData, ClassIndicator, Dataset, build_indicator,
                   center_data)
from .datagen import (SynthSpec, ar1_block_rows, class_mean,
                      equicorrelated_rows, sample, sample_type1, sample_type2)
from .ennet import (SOLVER_IDS, SolverOptions, SolverResult, Subproblem,
                    admm_x_update, backtrack_step, grad_f, kkt_residual,
                    objective_F, soft_threshold, solve_admm, solve_fista,
                    solve_fista_bt, solve_ista, solve_subproblem)
from .errors import (BacktrackingError, ConvergenceError, DataError,
                     DegenerateDirectionError, SolverError,
                     TrivialDirectionError)
from .penalty import (DensePenalty, DiagonalPenalty, IdentityPenalty,
                      LowRankPenalty, MaternParams, PenaltySpec,
                      build_matern_omega, dense_matrix, lipschitz_bound,
                      low_rank_truncate, m_inverse_apply, matern_covariance,
                      omega_matvec, omega_quadform)
from .sos import (ScoringState, SosFitConfig, SosModel, compute_lambda_bar,
                  fit_direction, fit_sos, initial_theta, sos_objective,
                  update_theta)
from .tuning import (CvResult, CvSpec, auto_lambda_bar, cross_validate,
                     lambda_grid, make_folds)

__version__ = "0.1.0"
