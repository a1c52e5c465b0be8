"""Finite-sample checks on the bootstrap label pairs.

For each replication we record how many pairs are false positives,
false negatives and how many bootstrap "true" labels disagree with the
imputed labels, plus the matrix statistic

    (1/sqrt(n)) * sum_i [FP_i (D+_i - Dbar+) + FN_i (D-_i - Dbar-)]

which stays near zero only when misclassification in the bootstrap world is
unrelated to the bias-direction matrices. The fixed-label scheme violates
this whenever the labels are correlated with the design.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..design import BiasMatrices, DesignError
from .plan import LabelPairDraw


def l3_statistic(fp, fn, vec_dp, vec_dm, dp_bar, dm_bar, n: int) -> np.ndarray:
    """Per-replication statistic, shape ``(R, k, k)``; ``fp``/``fn`` are 0/1 ``(R, n)`` matrices."""
    k = dp_bar.shape[0]
    fp_count = np.asarray(fp.sum(axis=1)).reshape(-1)
    fn_count = np.asarray(fn.sum(axis=1)).reshape(-1)
    raw = np.asarray(fp @ vec_dp) + np.asarray(fn @ vec_dm)
    raw = raw.reshape(-1, k, k)
    raw -= fp_count[:, None, None] * dp_bar + fn_count[:, None, None] * dm_bar
    return raw / np.sqrt(n)


def summarize(
    fp_count, fn_count, mismatch_count, l3, n: int, rejected: int = 0
) -> dict:
    fp_count = np.asarray(fp_count, dtype=float)
    fn_count = np.asarray(fn_count, dtype=float)
    R = fp_count.shape[0]
    root = np.sqrt(n)
    l3 = np.asarray(l3, dtype=float)
    l3_mean = l3.mean(axis=0)
    if R > 1:
        l3_se = l3.std(axis=0, ddof=1) / np.sqrt(R)
    else:
        l3_se = np.zeros_like(l3_mean)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(l3_se > 0, l3_mean / l3_se, np.where(l3_mean == 0, 0.0, np.inf))
    return {
        "replications": int(R),
        "rejected": int(rejected),
        "kappa_plus_star_mean": float(fp_count.mean() / root),
        "kappa_minus_star_mean": float(fn_count.mean() / root),
        "kappa_plus_star_var": float(np.var(fp_count / root, ddof=1)) if R > 1 else 0.0,
        "kappa_minus_star_var": float(np.var(fn_count / root, ddof=1)) if R > 1 else 0.0,
        "fp_rate_mean": float(fp_count.mean() / n),
        "fn_rate_mean": float(fn_count.mean() / n),
        "mismatch_rate_mean": float(np.mean(mismatch_count) / n),
        "l3_mean": l3_mean.tolist(),
        "l3_se": l3_se.tolist(),
        "l3_max_abs_t": float(np.max(np.abs(t))) if t.size else 0.0,
    }


def diagnose_labels(
    pairs: Sequence[LabelPairDraw], bm: BiasMatrices, n: int, theta_hat=None
) -> dict:
    """Diagnostics from explicitly retained label pairs (one per replication)."""
    if not bm.per_obs_available or bm.D_plus is None:
        raise DesignError("diagnose_labels needs BiasMatrices built with per_obs=True")
    k = bm.D_plus_bar.shape[0]
    ts = np.array([p.theta_star for p in pairs], dtype=np.int8).reshape(len(pairs), n)
    ths = np.array([p.theta_hat_star for p in pairs], dtype=np.int8).reshape(len(pairs), n)
    fp = sp.csr_matrix((ths == 1) & (ts == 0), dtype=float)
    fn = sp.csr_matrix((ts == 1) & (ths == 0), dtype=float)
    vec_dp = bm.D_plus.reshape(n, k * k)
    vec_dm = bm.D_minus.reshape(n, k * k)
    l3 = l3_statistic(fp, fn, vec_dp, vec_dm, bm.D_plus_bar, bm.D_minus_bar, n)
    if theta_hat is None:
        mismatch = np.zeros(len(pairs))
    else:
        mismatch = (ts != np.asarray(theta_hat)[None, :]).sum(axis=1)
    return summarize(
        np.asarray(fp.sum(axis=1)).reshape(-1),
        np.asarray(fn.sum(axis=1)).reshape(-1),
        mismatch,
        l3,
        n,
    )
