from .diagnostics import diagnose_labels, l3_statistic, summarize
from .engine import BOOT_RCOND_TOL, CHUNK, BootstrapEngine, BootstrapError, default_workers, run_bootstrap
from .intervals import QUANTILE_METHOD, draw_quantiles, percentile_ci
from .plan import (
    BootstrapDraws,
    BootstrapPlan,
    LabelPairDraw,
    PlanError,
    Scheme,
    WildWeights,
)
from .samplers import (
    BRANCHES,
    InvalidRatesError,
    coupled_label_pmf,
    coupled_rates_valid,
    coupled_thresholds,
    draw_rate_star,
    draw_valid_rate_star,
    draw_wild_weights,
    fixed_label_probs,
    sample_coupled_label,
    sample_fixed_label,
)

__all__ = [
    "BOOT_RCOND_TOL",
    "BRANCHES",
    "CHUNK",
    "QUANTILE_METHOD",
    "BootstrapDraws",
    "BootstrapEngine",
    "BootstrapError",
    "BootstrapPlan",
    "InvalidRatesError",
    "LabelPairDraw",
    "PlanError",
    "Scheme",
    "WildWeights",
    "coupled_label_pmf",
    "coupled_rates_valid",
    "coupled_thresholds",
    "default_workers",
    "diagnose_labels",
    "draw_quantiles",
    "draw_rate_star",
    "draw_valid_rate_star",
    "draw_wild_weights",
    "fixed_label_probs",
    "l3_statistic",
    "percentile_ci",
    "run_bootstrap",
    "sample_coupled_label",
    "sample_fixed_label",
    "summarize",
]
