"""A bundled synthetic dataset with a rare, noisily classified label.

It mimics a postings sample where very few jobs are remote (share of imputed
ones about 0.024), so the design is near singular and misclassification is
severe relative to the number of labelled ones. Columns: ``logwage``,
``remote`` (imputed label), ``remote_true``, ``const``, ``fulltime`` and a
categorical ``occupation``.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .design import Dataset
from .io import IngestReport, ingest_csv

NEAR_SINGULAR_FILE = "near_singular.csv"
OCCUPATIONS = ("35-food", "37-cleaning", "41-sales", "43-office", "11-mgmt")


def make_near_singular(n: int = 16315, seed: int = 2023) -> dict[str, np.ndarray]:
    """Draw the synthetic columns.

    True remote status has prevalence 0.0265; of the imputed ones about 27%
    are false positives, while 0.9% of all rows are remote jobs labelled
    non-remote. The true remote premium is 0.9 log points.
    """
    rng = np.random.default_rng(seed)
    occ = rng.choice(len(OCCUPATIONS), size=n, p=[0.55, 0.15, 0.12, 0.10, 0.08])
    fulltime = (rng.random(n) < 0.6).astype(float)
    # joint label law: P(1,0)=f_minus, P(0,1)=f_plus, P(1,1)=pi_hat - f_plus
    pi_hat, f_plus, f_minus = 0.024, 0.0065, 0.009
    u = rng.random(n)
    c = np.cumsum([pi_hat - f_plus, f_minus, f_plus])
    theta = (u < c[1]).astype(np.int8)
    theta_hat = ((u < c[0]) | ((u >= c[1]) & (u < c[2]))).astype(np.int8)
    occ_effect = np.array([0.0, -0.05, 0.10, 0.20, 0.45])[occ]
    logwage = 2.75 + 0.9 * theta + 0.12 * fulltime + occ_effect + 0.35 * rng.standard_normal(n)
    return {
        "logwage": np.round(logwage, 6),
        "remote": theta_hat,
        "remote_true": theta,
        "const": np.ones(n),
        "fulltime": fulltime,
        "occupation": np.array(OCCUPATIONS)[occ],
    }


def write_near_singular(path, n: int = 16315, seed: int = 2023) -> None:
    cols = make_near_singular(n, seed)
    names = list(cols)
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            row = []
            for k in names:
                v = cols[k][i]
                if k == "logwage":
                    row.append(f"{v:.6f}")
                elif k in ("const", "fulltime", "remote", "remote_true"):
                    row.append(str(int(v)))
                else:
                    row.append(str(v))
            fh.write(",".join(row) + "\n")


def near_singular_path() -> Path:
    return Path(str(resources.files("labelboot") / "data" / NEAR_SINGULAR_FILE))


def load_near_singular(fixed_effects: bool = False) -> tuple[Dataset, IngestReport]:
    """Outcome ``logwage``, label ``remote``, covariates ``const`` (plus FE if asked)."""
    if fixed_effects:
        return ingest_csv(
            near_singular_path(), "logwage", "remote", ["const"], ["occupation", "fulltime"], "remote_true"
        )
    return ingest_csv(near_singular_path(), "logwage", "remote", ["const"], true_label="remote_true")
