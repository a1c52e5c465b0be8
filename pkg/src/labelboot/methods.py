"""The six estimators compared throughout: OLS, the analytic correction and four bootstraps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import bchs_report, ols_ci
from .bootstrap import BootstrapDraws, BootstrapEngine, BootstrapPlan, Scheme, WildWeights
from .design import Dataset, DesignSpec, OlsFit, fit_dataset
from .misclass import MisclassRates

SIX_METHODS = (
    "ols",
    "bchs",
    "no_label",
    "fixed_label",
    "coupled_label",
    "coupled_rot_varadj",
)

#: bootstrap method name -> (scheme, rotate)
BOOTSTRAP_METHODS = {
    "no_label": (Scheme.NO_LABEL, False),
    "fixed_label": (Scheme.FIXED_LABEL, False),
    "coupled_label": (Scheme.COUPLED_LABEL, False),
    "coupled_varadj": (Scheme.COUPLED_LABEL_VARADJ, False),
    "coupled_rot": (Scheme.COUPLED_LABEL, True),
    "coupled_rot_varadj": (Scheme.COUPLED_LABEL_VARADJ, True),
}

ALL_METHODS = ("ols", "bchs") + tuple(BOOTSTRAP_METHODS)

DISPLAY = {
    "ols": "OLS",
    "bchs": "BCHS bias-corrected & var. adj.",
    "no_label": "No-label resampling",
    "fixed_label": "Fixed-label bootstrap",
    "coupled_label": "Coupled-label bootstrap",
    "coupled_varadj": "Coupled-label, var. adj.",
    "coupled_rot": "Coupled-label, rotation",
    "coupled_rot_varadj": "Coupled-label, rotation & var. adj.",
}


@dataclass
class MethodResult:
    method: str
    estimate: np.ndarray
    ci: np.ndarray  # (k, 2)
    draws: BootstrapDraws | None = None


def check_methods(methods: Sequence[str]) -> tuple[str, ...]:
    bad = [m for m in methods if m not in ALL_METHODS]
    if bad:
        raise ValueError(f"unknown method(s) {bad}; choose from {list(ALL_METHODS)}")
    return tuple(dict.fromkeys(methods))


def run_methods(
    data: Dataset,
    spec: DesignSpec,
    rates: MisclassRates,
    methods: Sequence[str] = SIX_METHODS,
    B: int = 499,
    seed: int = 0,
    alpha: float = 0.05,
    weights: WildWeights | str = WildWeights.STANDARD_NORMAL,
    workers: int | None = None,
    path: tuple[int, ...] = (),
    fit: OlsFit | None = None,
) -> dict[str, MethodResult]:
    methods = check_methods(methods)
    fit = fit_dataset(data, spec) if fit is None else fit
    out: dict[str, MethodResult] = {}
    if "ols" in methods:
        out["ols"] = MethodResult("ols", fit.beta_hat.copy(), ols_ci(fit, alpha))
    if "bchs" in methods:
        from .design import bias_matrices

        rep = bchs_report(fit, bias_matrices(data.Z, spec), rates, alpha)
        out["bchs"] = MethodResult("bchs", rep.beta_bc, rep.ci)
    boot = [m for m in methods if m in BOOTSTRAP_METHODS]
    if boot:
        plans = [
            BootstrapPlan(
                scheme=BOOTSTRAP_METHODS[m][0],
                rotate=BOOTSTRAP_METHODS[m][1],
                B=B,
                wild_weights=weights,
                seed=seed,
                alpha=alpha,
            )
            for m in boot
        ]
        engine = BootstrapEngine(data, spec, fit, rates, path)
        for m, draws in zip(boot, engine.run(plans, workers)):
            out[m] = MethodResult(m, draws.estimate(fit.beta_hat), draws.ci(fit.beta_hat, alpha), draws)
    return {m: out[m] for m in methods}
