from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Scheme(str, enum.Enum):
    NO_LABEL = "no_label"
    FIXED_LABEL = "fixed_label"
    COUPLED_LABEL = "coupled_label"
    COUPLED_LABEL_VARADJ = "coupled_label_varadj"

    @property
    def coupled(self) -> bool:
        return self in (Scheme.COUPLED_LABEL, Scheme.COUPLED_LABEL_VARADJ)


class WildWeights(str, enum.Enum):
    STANDARD_NORMAL = "normal"
    RADEMACHER = "rademacher"


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class BootstrapPlan:
    scheme: Scheme = Scheme.COUPLED_LABEL
    rotate: bool = False
    B: int = 499
    wild_weights: WildWeights = WildWeights.STANDARD_NORMAL
    seed: int = 0
    alpha: float = 0.05
    max_retries: int = 100

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "wild_weights", WildWeights(self.wild_weights))
        if int(self.B) != self.B or self.B < 1:
            raise PlanError(f"B must be a positive integer, got {self.B!r}")
        if not 0.0 < self.alpha < 1.0:
            raise PlanError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.rotate and not self.scheme.coupled:
            raise PlanError(f"rotation is only defined for coupled-label schemes, not {self.scheme.value}")
        if not 0 <= int(self.seed) < 2**64:
            raise PlanError(f"seed must be a 64-bit unsigned value, got {self.seed}")
        if self.max_retries < 0:
            raise PlanError("max_retries must be >= 0")

    @property
    def label(self) -> str:
        return self.scheme.value + ("+rotate" if self.rotate else "")


@dataclass
class LabelPairDraw:
    theta_star: np.ndarray
    theta_hat_star: np.ndarray
    f_plus_star: float
    f_minus_star: float


@dataclass
class BootstrapDraws:
    """Bootstrap draws of ``beta* - beta_hat`` (or the rotated analogue), one row per replication."""

    plan: BootstrapPlan
    deltas: np.ndarray
    n: int
    fp_count: np.ndarray
    fn_count: np.ndarray
    mismatch_count: np.ndarray
    f_plus_star: np.ndarray
    f_minus_star: np.ndarray
    l3: np.ndarray  # (B, k, k) per-replication misclassification/design correlation statistic
    rejected: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def B(self) -> int:
        return self.deltas.shape[0]

    def estimate(self, beta_hat) -> np.ndarray:
        """Bootstrap bias-corrected point estimate ``beta_hat - mean(draws)``."""
        return np.asarray(beta_hat, dtype=float) - self.deltas.mean(axis=0)

    def ci(self, beta_hat, alpha: float | None = None) -> np.ndarray:
        from .intervals import percentile_ci

        return percentile_ci(self, beta_hat, self.plan.alpha if alpha is None else alpha)
