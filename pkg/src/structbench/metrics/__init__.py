"""Scores along the four evaluation dimensions."""

from .density import DensityReport, alpha_precision, beta_recall, density_report, shape_score, trend_score
from .fidelity import (
    Confusion,
    LevelScore,
    StructuralFidelityReport,
    balanced_accuracy,
    score_predictions,
    structural_fidelity,
)
from .privacy import PrivacyReport, authenticity, dcr, lower_median, privacy_report
from .utility import (
    KNearest,
    LinearModel,
    UtilityMetric,
    UtilityReport,
    balanced_accuracy_pct,
    default_predictors,
    ingest_external_predictions,
    load_external_predictions,
    standardised_rmse,
    utility_eval,
)

__all__ = [
    "Confusion",
    "DensityReport",
    "KNearest",
    "LevelScore",
    "LinearModel",
    "PrivacyReport",
    "StructuralFidelityReport",
    "UtilityMetric",
    "UtilityReport",
    "alpha_precision",
    "authenticity",
    "balanced_accuracy",
    "balanced_accuracy_pct",
    "beta_recall",
    "dcr",
    "default_predictors",
    "density_report",
    "ingest_external_predictions",
    "load_external_predictions",
    "lower_median",
    "privacy_report",
    "score_predictions",
    "shape_score",
    "standardised_rmse",
    "structural_fidelity",
    "trend_score",
    "utility_eval",
]
