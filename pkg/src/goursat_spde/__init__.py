"""Simulation of Y_xt = F(Y) + sigma * W_xt on the quarter-plane with Goursat data."""

__version__ = "0.1.0"

from .grid import BoundaryData, GridSpec, ScalarField, build_grid, constant_boundary, sample_boundary
from .source import Affine, Cubic, Exponential, Quadratic, SineGordon, Zero, evaluate, make_source
from .noise import IncrementField, NoiseConfig, brownian_sheet, sample_increments
from .solver import Record, SolveResult, mean_matches_deterministic_check, solve, solve_recorded
from .ensemble import EnsembleSpec, EnsembleStats, run_ensemble, sd_growth_fit
from .oracle import (
    BreatherParams,
    KinkParams,
    LinearExactParams,
    breather,
    euclidean_residual,
    kink,
    lightcone_to_euclidean,
    linear_exact,
    picard_solve,
)
from .analysis import count_peaks, relative_error, sheet_covariance, threshold_indicator

__all__ = [
    "BoundaryData", "GridSpec", "ScalarField", "build_grid", "constant_boundary", "sample_boundary",
    "Affine", "Cubic", "Exponential", "Quadratic", "SineGordon", "Zero", "evaluate", "make_source",
    "IncrementField", "NoiseConfig", "brownian_sheet", "sample_increments",
    "Record", "SolveResult", "mean_matches_deterministic_check", "solve", "solve_recorded",
    "EnsembleSpec", "EnsembleStats", "run_ensemble", "sd_growth_fit",
    "BreatherParams", "KinkParams", "LinearExactParams", "breather", "euclidean_residual", "kink",
    "lightcone_to_euclidean", "linear_exact", "picard_solve",
    "count_peaks", "relative_error", "sheet_covariance", "threshold_indicator",
]
