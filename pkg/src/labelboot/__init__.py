"""Bootstrap inference for linear regressions on AI/ML-generated binary labels."""

from .analytic import AnalyticReport, bchs_correct, bchs_report, bchs_variance, ols_ci, wald_ci
from .design import (
    BiasMatrices,
    Dataset,
    DesignError,
    DesignSpec,
    Form,
    OlsFit,
    SingularDesignError,
    bias_matrices,
    build_design,
    design_blocks,
    fit_dataset,
    ols_fit,
)
from .misclass import MisclassRates, RatesError, estimate_rates, kappa, rates_from_summary

__version__ = "0.1.0"

__all__ = [
    "AnalyticReport",
    "BiasMatrices",
    "Dataset",
    "DesignError",
    "DesignSpec",
    "Form",
    "MisclassRates",
    "OlsFit",
    "RatesError",
    "SingularDesignError",
    "bchs_correct",
    "bchs_report",
    "bchs_variance",
    "bias_matrices",
    "build_design",
    "design_blocks",
    "estimate_rates",
    "fit_dataset",
    "kappa",
    "ols_ci",
    "ols_fit",
    "rates_from_summary",
    "wald_ci",
]
