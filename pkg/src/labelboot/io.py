"""CSV ingestion, dataset serialization and report writers."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .design import Dataset, DesignSpec
from .misclass import MisclassRates, estimate_rates

MISSING = {"", "na", "nan", "null", "none", "."}


class DataError(ValueError):
    """Problems with an input file (missing columns, bad cells, empty file)."""


@dataclass
class IngestReport:
    path: str
    rows_read: int
    rows_dropped: int
    #: fixed-effect column -> omitted base level
    base_levels: dict[str, str] = field(default_factory=dict)
    #: fixed-effect column -> generated indicator column names
    indicators: dict[str, list[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "rows_read": self.rows_read,
            "rows_dropped": self.rows_dropped,
            "base_levels": self.base_levels,
            "indicators": self.indicators,
        }


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(c.strip() for c in rows[0]):
        raise DataError(f"{path}: empty file (a header row is required)")
    header = [h.strip() for h in rows[0]]
    dupes = sorted({h for h in header if header.count(h) > 1})
    if dupes:
        raise DataError(f"{path}: duplicate column name(s) {dupes}")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise DataError(f"{path}: row {i + 1} has {len(r)} fields, header has {len(header)}")
    return header, body


def _index(header, names, path, role) -> list[int]:
    missing = [c for c in names if c not in header]
    if missing:
        raise DataError(f"{path}: {role} column(s) {missing} not in header {header}")
    return [header.index(c) for c in names]


def ingest_csv(
    path,
    outcome: str,
    label: str,
    covariates: Sequence[str] = (),
    fixed_effects: Sequence[str] = (),
    true_label: str | None = None,
) -> tuple[Dataset, IngestReport]:
    """Read a CSV into a :class:`Dataset`.

    Covariates must be numeric. Each fixed-effect column is treated as
    categorical and expanded into indicators for every level except the
    lexicographically first, which is the base. Rows with a missing cell in
    any used column are dropped and counted. Row numbers in errors count data
    rows from 1 (the header is row 0).
    """
    header, body = _read_rows(path)
    covariates, fixed_effects = list(covariates), list(fixed_effects)
    used = [outcome, label] + covariates + fixed_effects + ([true_label] if true_label else [])
    idx = dict(zip(used, _index(header, used, path, "required")))
    keep = [r for r in body if not any(_is_missing(r[idx[c]]) for c in used)]
    dropped = len(body) - len(keep)
    if not keep:
        raise DataError(f"{path}: no complete rows ({len(body)} read, {dropped} with missing cells)")
    row_no = [i + 1 for i, r in enumerate(body) if not any(_is_missing(r[idx[c]]) for c in used)]

    def numeric(col):
        out = np.empty(len(keep))
        j = idx[col]
        for i, r in enumerate(keep):
            try:
                out[i] = float(r[j])
            except ValueError:
                raise DataError(f"{path}: row {row_no[i]}, column {col!r}: non-numeric value {r[j]!r}") from None
            if not math.isfinite(out[i]):
                raise DataError(f"{path}: row {row_no[i]}, column {col!r}: non-finite value {r[j]!r}")
        return out

    def binary(col):
        vals = numeric(col)
        bad = np.flatnonzero((vals != 0) & (vals != 1))
        if bad.size:
            i = int(bad[0])
            raise DataError(
                f"{path}: row {row_no[i]}, column {col!r}: label must be 0 or 1, got {keep[i][idx[col]]!r}"
            )
        return vals.astype(np.int8)

    y = numeric(outcome)
    th = binary(label)
    tt = binary(true_label) if true_label else None
    cols = [numeric(c) for c in covariates]
    names = list(covariates)
    report = IngestReport(str(path), len(body), dropped)
    for fe in fixed_effects:
        raw = [r[idx[fe]].strip() for r in keep]
        levels = sorted(set(raw))
        report.base_levels[fe] = levels[0]
        report.indicators[fe] = []
        for lev in levels[1:]:
            cols.append(np.array([v == lev for v in raw], dtype=float))
            name = f"{fe}[{lev}]"
            names.append(name)
            report.indicators[fe].append(name)
    Z = np.column_stack(cols) if cols else np.empty((len(keep), 0))
    return Dataset(y, Z, th, tt, tuple(names)), report


def write_dataset_csv(
    data: Dataset, path, outcome: str = "y", label: str = "theta_hat", true_label: str = "theta_true"
) -> None:
    """Write a dataset so that :func:`ingest_csv` reproduces it exactly."""
    names = list(data.columns) if data.columns else [f"z{j}" for j in range(data.Z.shape[1])]
    header = [outcome, label] + names + ([true_label] if data.theta_true is not None else [])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(data.n):
            row = [repr(float(data.y[i])), str(int(data.theta_hat[i]))]
            row += [repr(float(v)) for v in data.Z[i]]
            if data.theta_true is not None:
                row.append(str(int(data.theta_true[i])))
            w.writerow(row)


def read_rates_file(path) -> MisclassRates:
    """Validation pairs: a CSV whose first two columns are (theta, theta_hat)."""
    header, body = _read_rows(path)
    if len(header) < 2:
        raise DataError(f"{path}: rates file needs two columns (theta, theta_hat)")
    if not body:
        raise DataError(f"{path}: rates file has no rows")
    pairs = np.empty((len(body), 2))
    for i, r in enumerate(body):
        for j in range(2):
            try:
                v = float(r[j])
            except ValueError:
                raise DataError(f"{path}: row {i + 1}, column {header[j]!r}: non-numeric value {r[j]!r}") from None
            if v not in (0.0, 1.0):
                raise DataError(f"{path}: row {i + 1}, column {header[j]!r}: label must be 0 or 1, got {r[j]!r}")
            pairs[i, j] = v
    return estimate_rates(pairs[:, 0], pairs[:, 1])


def resolve_design(description, columns: Sequence[str]) -> DesignSpec:
    """Turn a user design description into a :class:`DesignSpec` over ``columns``.

    Accepted forms: ``"additive"``; ``"interaction:a,b"`` (label times the named
    columns, followed by every covariate); or a mapping with ``g0``/``g1``
    lists of column names and the tokens ``"1"``/``"0"``.
    """
    columns = list(columns)

    def col(name):
        if name not in columns:
            raise DataError(f"design references unknown column {name!r}; available: {columns}")
        return columns.index(name)

    if isinstance(description, dict):
        form = str(description.get("form", "custom")).lower()
        if form != "custom":
            return resolve_design(
                form + (":" + ",".join(description.get("interaction", [])) if form == "interaction" else ""),
                columns,
            )
        try:
            g0, g1 = description["g0"], description["g1"]
        except KeyError as exc:
            raise DataError(f"custom design needs g0 and g1 recipe lists (missing {exc})") from None

        def tok(t):
            t = str(t)
            return t if t in ("0", "1") else col(t)

        names = description.get("names")
        return DesignSpec.from_recipes([tok(t) for t in g0], [tok(t) for t in g1], names=tuple(names) if names else None)
    text = str(description).strip()
    if text.lower() == "additive":
        return DesignSpec.additive()
    if text.lower().startswith("interaction:"):
        names = [s.strip() for s in text.split(":", 1)[1].split(",") if s.strip()]
        if not names:
            raise DataError("interaction design needs at least one column, e.g. interaction:x")
        return DesignSpec.interaction([col(c) for c in names])
    raise DataError(f"unknown design {text!r}; use 'additive', 'interaction:<cols>' or a custom mapping")


def coefficient_names(spec: DesignSpec, columns: Sequence[str], label: str = "theta") -> list[str]:
    columns = list(columns)
    if spec.names:
        return list(spec.names)
    r0, r1 = spec.recipes(len(columns))
    out = []
    for a, b in zip(r0, r1):
        if a == b:
            out.append("const" if a == "1" else ("zero" if a == "0" else columns[a]))
        elif a == "0" and b == "1":
            out.append(label)
        elif a == "0" and isinstance(b, int):
            out.append(f"{label}*{columns[b]}")
        else:
            out.append(f"g({a},{b})")
    return out


# ----------------------------------------------------------------------
# structured output


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_clean(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def write_records(path, records: Sequence[dict], chash: str, seed: int) -> None:
    """Line-delimited JSON; every record carries the config hash and seed."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            rec = dict(rec)
            rec["config_hash"] = chash
            rec["seed"] = int(seed)
            fh.write(json.dumps(_clean(rec), sort_keys=True) + "\n")


def read_records(path) -> list[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def format_estimates(rows: Sequence[dict], display: dict[str, str], alpha: float = 0.05, digits: int = 3) -> str:
    """Aligned text: one row per method, estimate and interval per coefficient."""
    coefs = list(dict.fromkeys(r["coef"] for r in rows))
    methods = list(dict.fromkeys(r["method"] for r in rows))
    by = {(r["method"], r["coef"]): r for r in rows}
    cells = {}
    for key, r in by.items():
        cells[key] = (f"{r['estimate']:.{digits}f}", f"[{r['ci_lo']:.{digits}f}, {r['ci_hi']:.{digits}f}]")
    w_m = max(len("Method"), *(len(display.get(m, m)) for m in methods))
    w_e = max([len("Estimate")] + [len(c[0]) for c in cells.values()])
    ci_head = f"{100 * (1 - alpha):g}% CI"
    w_c = max([len(ci_head)] + [len(c[1]) for c in cells.values()])
    lines = []
    for coef in coefs:
        lines.append(f"Coefficient: {coef}")
        lines.append(f"{'Method':<{w_m}}  {'Estimate':>{w_e}}  {ci_head:^{w_c}}")
        lines.append("-" * (w_m + w_e + w_c + 4))
        for m in methods:
            if (m, coef) in cells:
                e, c = cells[(m, coef)]
                lines.append(f"{display.get(m, m):<{w_m}}  {e:>{w_e}}  {c:>{w_c}}")
        lines.append("")
    return "\n".join(lines)
