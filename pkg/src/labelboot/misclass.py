"""Classifier error rates from an external validation sample."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np


class RatesError(ValueError):
    pass


class RateConsistencyWarning(UserWarning):
    """n is too large relative to m for sqrt(n) * F_hat to be consistent."""


@dataclass(frozen=True)
class MisclassRates:
    """False-positive rate ``f_plus``, false-negative rate ``f_minus`` and sample size ``m``.

    Both rates are unconditional: ``f_plus`` estimates ``P(theta_hat=1, theta=0)``.
    """

    f_plus: float
    f_minus: float
    m: int

    def __post_init__(self):
        fp, fm = float(self.f_plus), float(self.f_minus)
        if not (0.0 <= fp <= 1.0 and 0.0 <= fm <= 1.0):
            raise RatesError(f"rates must lie in [0, 1]: f_plus={fp}, f_minus={fm}")
        if fp + fm > 1.0 + 1e-12:
            raise RatesError(f"f_plus + f_minus must be <= 1, got {fp + fm}")
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise RatesError(f"external sample size m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "f_plus", fp)
        object.__setattr__(self, "f_minus", fm)
        object.__setattr__(self, "m", int(self.m))

    def kappa_plus(self, n: int) -> float:
        return kappa(self, n)[0]

    def kappa_minus(self, n: int) -> float:
        return kappa(self, n)[1]

    @property
    def is_zero(self) -> bool:
        return self.f_plus == 0.0 and self.f_minus == 0.0


def estimate_rates(theta, theta_hat) -> MisclassRates:
    """Estimate rates from ``m`` validation pairs ``(theta_i, theta_hat_i)``."""
    t = np.asarray(theta).reshape(-1)
    th = np.asarray(theta_hat).reshape(-1)
    if t.shape != th.shape:
        raise RatesError(f"pair columns differ in length: {t.shape[0]} vs {th.shape[0]}")
    m = t.shape[0]
    if m == 0:
        raise RatesError("external sample is empty")
    for name, arr in (("theta", t), ("theta_hat", th)):
        bad = ~((arr == 0) | (arr == 1))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise RatesError(f"{name} must be 0/1; found {arr[i]!r} in pair {i}")
    t = t.astype(np.int64)
    th = th.astype(np.int64)
    n_fp = int(np.sum(th * (1 - t)))
    n_fn = int(np.sum(t * (1 - th)))
    return MisclassRates(n_fp / m, n_fn / m, m)


def rates_from_summary(f_plus: float, f_minus: float, m: int) -> MisclassRates:
    return MisclassRates(f_plus, f_minus, m)


def kappa(rates: MisclassRates, n: int) -> tuple[float, float]:
    """``(sqrt(n) * f_plus, sqrt(n) * f_minus)``; warns once ``n >= m**2``."""
    if n < 1:
        raise RatesError(f"n must be >= 1, got {n}")
    if n >= rates.m**2:
        warnings.warn(
            f"n={n} is not small relative to m^2={rates.m ** 2}; "
            "the scaled rates may be poorly estimated",
            RateConsistencyWarning,
            stacklevel=2,
        )
    root = math.sqrt(n)
    return root * rates.f_plus, root * rates.f_minus
