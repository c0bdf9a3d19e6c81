"""ADMM Lasso and Network Lasso for ride-sharing trip data."""
from .kernels import BACKEND
from .lasso_admm import AdmmConfig, LassoProblem, LassoSolution, lambda_sweep, solve_lasso
from .network_lasso import (
    NetworkProblem,
    NetworkSolution,
    consensus_fraction,
    extract_clusters,
    predict_fares,
    regularization_path,
    solve_network_lasso,
)

__version__ = "0.1.0"
