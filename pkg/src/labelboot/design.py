"""Regression designs built from a binary label and observed covariates.

A design is described by the known map ``g(theta, z)``. Every supported form
reduces to a pair of column recipes, one for ``theta = 0`` and one for
``theta = 1``; each recipe entry is either an integer index into ``Z`` or one
of the constant tokens ``"1"`` and ``"0"``. Keeping ``g`` in this mechanical
form is what lets the bias-direction matrices be computed exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.linalg

Token = Union[int, str]

#: reciprocal condition number below which a design is treated as singular
RCOND_TOL = 1e-10


class DesignError(ValueError):
    """Raised for inconsistent design specifications or inputs."""


class SingularDesignError(DesignError):
    """Raised when a design matrix is rank deficient within tolerance."""

    def __init__(self, message: str, columns: Sequence[int] = ()):
        super().__init__(message)
        self.columns = tuple(columns)


class Form(str, enum.Enum):
    ADDITIVE = "additive"
    INTERACTION = "interaction"
    CUSTOM = "custom"


def _check_token(tok: Token) -> Token:
    if isinstance(tok, (bool, np.bool_)):
        raise DesignError(f"invalid recipe token {tok!r}")
    if isinstance(tok, (int, np.integer)):
        if tok < 0:
            raise DesignError(f"negative column index {tok} in recipe")
        return int(tok)
    if tok in ("0", "1"):
        return tok
    raise DesignError(f"invalid recipe token {tok!r}; use a column index, '0' or '1'")


@dataclass(frozen=True)
class DesignSpec:
    """The known map ``g(theta, z)``.

    ``ADDITIVE`` gives ``(theta, z')'``. ``INTERACTION`` gives
    ``(theta * z[interaction_columns]', z[base_columns]')'`` where
    ``base_columns=None`` means every column of ``Z``. ``CUSTOM`` takes the two
    recipes verbatim. No intercept is ever inserted implicitly.
    """

    form: Form = Form.ADDITIVE
    interaction_columns: tuple[int, ...] = ()
    base_columns: tuple[int, ...] | None = None
    custom: tuple[tuple[Token, ...], tuple[Token, ...]] | None = None
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "form", Form(self.form))
        if self.form is Form.CUSTOM:
            if self.custom is None:
                raise DesignError("custom design needs a (g0, g1) recipe pair")
            g0, g1 = (tuple(_check_token(t) for t in r) for r in self.custom)
            if len(g0) != len(g1):
                raise DesignError(
                    f"custom recipes differ in length: g(0,.) has {len(g0)}, g(1,.) has {len(g1)}"
                )
            if not g0:
                raise DesignError("custom recipes are empty")
            object.__setattr__(self, "custom", (g0, g1))
        elif self.form is Form.INTERACTION and not self.interaction_columns:
            raise DesignError("interaction design needs at least one interaction column")
        object.__setattr__(
            self, "interaction_columns", tuple(int(c) for c in self.interaction_columns)
        )
        if self.base_columns is not None:
            object.__setattr__(self, "base_columns", tuple(int(c) for c in self.base_columns))

    @classmethod
    def additive(cls) -> DesignSpec:
        return cls(Form.ADDITIVE)

    @classmethod
    def interaction(cls, columns: Sequence[int], base: Sequence[int] | None = None) -> DesignSpec:
        return cls(
            Form.INTERACTION,
            interaction_columns=tuple(columns),
            base_columns=None if base is None else tuple(base),
        )

    @classmethod
    def from_recipes(cls, g0: Sequence[Token], g1: Sequence[Token], names=None) -> DesignSpec:
        return cls(Form.CUSTOM, custom=(tuple(g0), tuple(g1)), names=names)

    def recipes(self, d_z: int) -> tuple[tuple[Token, ...], tuple[Token, ...]]:
        """Return ``(g0, g1)`` recipes for covariates of width ``d_z``."""
        if self.form is Form.ADDITIVE:
            cols = tuple(range(d_z))
            r0, r1 = ("0",) + cols, ("1",) + cols
        elif self.form is Form.INTERACTION:
            base = tuple(range(d_z)) if self.base_columns is None else self.base_columns
            inter = self.interaction_columns
            r0 = ("0",) * len(inter) + base
            r1 = inter + base
        else:
            r0, r1 = self.custom
        for tok in r0 + r1:
            if isinstance(tok, int) and tok >= d_z:
                raise DesignError(f"recipe references column {tok} but Z has {d_z} columns")
        return r0, r1

    def width(self, d_z: int) -> int:
        return len(self.recipes(d_z)[0])


@dataclass
class Dataset:
    y: np.ndarray
    Z: np.ndarray
    theta_hat: np.ndarray
    theta_true: np.ndarray | None = None
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        Z = np.asarray(self.Z, dtype=float)
        if Z.ndim == 1:
            Z = Z[:, None]
        self.Z = Z
        self.theta_hat = as_labels(self.theta_hat, "theta_hat")
        if self.theta_true is not None:
            self.theta_true = as_labels(self.theta_true, "theta_true")
        n = self.y.shape[0]
        lengths = {"Z": Z.shape[0], "theta_hat": self.theta_hat.shape[0]}
        if self.theta_true is not None:
            lengths["theta_true"] = self.theta_true.shape[0]
        bad = {k: v for k, v in lengths.items() if v != n}
        if bad:
            raise DesignError(f"length mismatch with y (n={n}): {bad}")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def pi_hat(self) -> float:
        return float(self.theta_hat.mean())


def as_labels(theta, name: str = "theta") -> np.ndarray:
    """Validate a 0/1 label vector and return it as ``int8``."""
    arr = np.asarray(theta)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    ok = (arr == 0) | (arr == 1)
    if not np.all(ok):
        idx = int(np.flatnonzero(~ok)[0])
        raise DesignError(f"{name} must be 0/1; found {arr[idx]!r} at position {idx}")
    return arr.astype(np.int8)


def _apply_recipe(recipe: Sequence[Token], Z: np.ndarray) -> np.ndarray:
    n = Z.shape[0]
    out = np.empty((n, len(recipe)))
    for j, tok in enumerate(recipe):
        if tok == "1":
            out[:, j] = 1.0
        elif tok == "0":
            out[:, j] = 0.0
        else:
            out[:, j] = Z[:, tok]
    return out


def design_blocks(Z: np.ndarray, spec: DesignSpec) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``g(0, Z_i)`` and ``g(1, Z_i)`` row-wise as two ``n x k`` arrays."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    r0, r1 = spec.recipes(Z.shape[1])
    return _apply_recipe(r0, Z), _apply_recipe(r1, Z)


def build_design(theta, Z, spec: DesignSpec) -> np.ndarray:
    """Rows ``g(theta_i, Z_i)``."""
    theta = as_labels(theta)
    G0, G1 = design_blocks(Z, spec)
    if theta.shape[0] != G0.shape[0]:
        raise DesignError(f"theta has {theta.shape[0]} rows but Z has {G0.shape[0]}")
    return np.where(theta[:, None] == 1, G1, G0)


@dataclass
class OlsFit:
    beta_hat: np.ndarray
    residuals: np.ndarray
    Q_hat: np.ndarray
    Q_hat_inv: np.ndarray
    sigma_hat: np.ndarray
    pi_hat: float = float("nan")

    @property
    def n(self) -> int:
        return self.residuals.shape[0]

    @property
    def k(self) -> int:
        return self.beta_hat.shape[0]

    def sandwich(self) -> np.ndarray:
        """Heteroskedasticity-robust ``V_hat = Q^-1 Sigma Q^-1`` (not divided by n)."""
        V = self.Q_hat_inv @ self.sigma_hat @ self.Q_hat_inv
        return 0.5 * (V + V.T)


def ols_fit(design: np.ndarray, y, theta_hat=None) -> OlsFit:
    """Least squares by pivoted QR with an explicit rank check."""
    X = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n, k = X.shape
    if y.shape[0] != n:
        raise DesignError(f"design has {n} rows but y has {y.shape[0]}")
    if n < k:
        raise SingularDesignError(f"design has fewer rows ({n}) than columns ({k})", range(n, k))
    Qm, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    sv = np.linalg.svd(R, compute_uv=False)
    rcond = sv[-1] / sv[0] if sv[0] > 0 else 0.0
    if rcond < RCOND_TOL:
        # pivoted QR pushes dependent columns to the tail
        tail = [int(piv[j]) for j in range(k) if diag[j] <= RCOND_TOL * diag[0]] or [int(piv[-1])]
        raise SingularDesignError(
            f"design is singular (rcond={rcond:.3g}); suspect columns {sorted(tail)}", tail
        )
    coef = scipy.linalg.solve_triangular(R, Qm.T @ y)
    beta = np.empty(k)
    beta[piv] = coef
    resid = y - X @ beta
    S = X.T @ X
    Q_hat = S / n
    # (X'X)^-1 = R^-1 R^-T up to the pivot permutation
    Rinv = scipy.linalg.solve_triangular(R, np.eye(k))
    inv_p = Rinv @ Rinv.T
    S_inv = np.empty((k, k))
    S_inv[np.ix_(piv, piv)] = inv_p
    Q_inv = n * S_inv
    Xu = X * resid[:, None]
    sigma = Xu.T @ Xu / n
    pi_hat = float("nan") if theta_hat is None else float(np.mean(theta_hat))
    return OlsFit(
        beta_hat=beta,
        residuals=resid,
        Q_hat=Q_hat,
        Q_hat_inv=0.5 * (Q_inv + Q_inv.T),
        sigma_hat=sigma,
        pi_hat=pi_hat,
    )


def fit_dataset(data: Dataset, spec: DesignSpec) -> OlsFit:
    X = build_design(data.theta_hat, data.Z, spec)
    if data.n < X.shape[1] + 1:
        raise DesignError(f"need n >= k+1 observations, got n={data.n}, k={X.shape[1]}")
    return ols_fit(X, data.y, data.theta_hat)


@dataclass
class BiasMatrices:
    D_plus_bar: np.ndarray
    D_minus_bar: np.ndarray
    per_obs_available: bool = False
    D_plus: np.ndarray | None = None
    D_minus: np.ndarray | None = None


def bias_matrices(Z, spec: DesignSpec, per_obs: bool = False) -> BiasMatrices:
    """Averages of ``D+_i = g1 (g1 - g0)'`` and ``D-_i = g0 (g0 - g1)'``."""
    G0, G1 = design_blocks(Z, spec)
    n = G0.shape[0]
    delta = G1 - G0
    Dp_bar = G1.T @ delta / n
    Dm_bar = -(G0.T @ delta) / n
    Dp = Dm = None
    if per_obs:
        Dp = np.einsum("ij,ik->ijk", G1, delta)
        Dm = -np.einsum("ij,ik->ijk", G0, delta)
    return BiasMatrices(Dp_bar, Dm_bar, per_obs, Dp, Dm)
