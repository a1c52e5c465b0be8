"""Analytic bias correction and its finite-sample variance adjustment.

This is the plug-in benchmark the bootstrap methods are compared against:
the corrected estimator ``(I + G+ F+ + G- F-) beta_hat`` with
``G+- = Q_hat^-1 Dbar+-`` and a sandwich variance inflated by the sampling
noise in the estimated rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .design import BiasMatrices, OlsFit
from .misclass import MisclassRates


@dataclass
class AnalyticReport:
    beta_bc: np.ndarray
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    var_base: np.ndarray
    var_adjustment: np.ndarray
    ci: np.ndarray  # (k, 2)

    @property
    def variance(self) -> np.ndarray:
        return self.var_base + self.var_adjustment


def gammas(fit: OlsFit, bm: BiasMatrices) -> tuple[np.ndarray, np.ndarray]:
    return fit.Q_hat_inv @ bm.D_plus_bar, fit.Q_hat_inv @ bm.D_minus_bar


def bchs_correct(fit: OlsFit, bm: BiasMatrices, rates: MisclassRates) -> np.ndarray:
    gp, gm = gammas(fit, bm)
    k = fit.k
    return (np.eye(k) + gp * rates.f_plus + gm * rates.f_minus) @ fit.beta_hat


def _adjustment(fit, bm, rates, beta) -> np.ndarray:
    n, m = fit.n, rates.m
    gp, gm = gammas(fit, bm)
    a = gp @ beta
    b = gm @ beta
    wp = n * rates.f_plus * (1.0 - rates.f_plus) / m
    wm = n * rates.f_minus * (1.0 - rates.f_minus) / m
    # cross terms in f_plus * f_minus are O(n^-1/2) and dropped
    return (wp * np.outer(a, a) + wm * np.outer(b, b)) / n


def bchs_variance(
    fit: OlsFit, bm: BiasMatrices, rates: MisclassRates, beta_for_bias=None
) -> np.ndarray:
    """Variance of the corrected estimator (already divided by n)."""
    beta = fit.beta_hat if beta_for_bias is None else np.asarray(beta_for_bias, dtype=float)
    return fit.sandwich() / fit.n + _adjustment(fit, bm, rates, beta)


def wald_ci(beta, var, alpha: float = 0.05) -> np.ndarray:
    """Normal-quantile intervals; ``var`` is a covariance matrix or a vector of variances."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    var = np.asarray(var, dtype=float)
    diag = np.diag(var) if var.ndim == 2 else np.atleast_1d(var)
    if np.any(diag < 0):
        j = int(np.flatnonzero(diag < 0)[0])
        raise ValueError(f"negative variance {diag[j]} for coefficient {j}")
    half = norm.ppf(1.0 - alpha / 2.0) * np.sqrt(diag)
    return np.column_stack([beta - half, beta + half])


def ols_ci(fit: OlsFit, alpha: float = 0.05) -> np.ndarray:
    """HC0 robust Wald intervals around the uncorrected OLS estimate."""
    return wald_ci(fit.beta_hat, fit.sandwich() / fit.n, alpha)


def bchs_report(
    fit: OlsFit, bm: BiasMatrices, rates: MisclassRates, alpha: float = 0.05
) -> AnalyticReport:
    gp, gm = gammas(fit, bm)
    beta_bc = bchs_correct(fit, bm, rates)
    base = fit.sandwich() / fit.n
    adj = _adjustment(fit, bm, rates, beta_bc)
    return AnalyticReport(
        beta_bc=beta_bc,
        gamma_plus=gp,
        gamma_minus=gm,
        var_base=base,
        var_adjustment=adj,
        ci=wald_ci(beta_bc, base + adj, alpha),
    )
