"""Robust M-estimators of the multivariate mean."""

from .comparators import empirical_mean, geometric_median, geometric_median_of_means
from .data import Dataset, DatasetSpec, dataset_presets, generate
from .diagnostics import influence_statistic, variance_estimates
from .estimator import EstimateResult, EstimatorConfig, estimate, irls_estimate, population_location_1d
from .score import Kind, ScoreFamily, catoni, huber, polynomial
from .tuning import BetaSelection, select_beta

__all__ = [
    "BetaSelection",
    "Dataset",
    "DatasetSpec",
    "EstimateResult",
    "EstimatorConfig",
    "Kind",
    "ScoreFamily",
    "catoni",
    "dataset_presets",
    "empirical_mean",
    "estimate",
    "generate",
    "geometric_median",
    "geometric_median_of_means",
    "huber",
    "influence_statistic",
    "irls_estimate",
    "polynomial",
    "population_location_1d",
    "select_beta",
    "variance_estimates",
]
