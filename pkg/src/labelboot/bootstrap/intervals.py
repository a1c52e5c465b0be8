from __future__ import annotations

import numpy as np

#: Quantile positions p(k) = k / (B + 1) with linear interpolation between order
#: statistics (Hyndman-Fan type 6), clamped to the sample range.
QUANTILE_METHOD = "weibull"


def draw_quantiles(deltas: np.ndarray, probs) -> np.ndarray:
    return np.quantile(np.asarray(deltas, dtype=float), probs, axis=0, method=QUANTILE_METHOD)


def percentile_ci(draws, beta_hat, alpha: float = 0.05) -> np.ndarray:
    """Equal-tailed intervals ``[b_j - q_{1-a/2,j}, b_j - q_{a/2,j}]``; shape ``(k, 2)``."""
    deltas = getattr(draws, "deltas", draws)
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim == 1:
        deltas = deltas[:, None]
    if deltas.shape[0] < 2:
        raise ValueError(f"need at least 2 bootstrap draws, got {deltas.shape[0]}")
    if not np.all(np.isfinite(deltas)):
        raise ValueError("bootstrap draws contain non-finite values")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    lo_q, hi_q = draw_quantiles(deltas, [alpha / 2.0, 1.0 - alpha / 2.0])
    beta_hat = np.asarray(beta_hat, dtype=float).reshape(-1)
    return np.column_stack([beta_hat - hi_q, beta_hat - lo_q])
