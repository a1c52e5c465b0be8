"""Command line entry point.

    labelboot estimate --data postings.csv --outcome logwage --label remote \\
        --covariates const --design additive --rates 0.009,0.009,1000 --out results/
    labelboot simulate --preset table1-desk --out sims/
    labelboot rates --rates-file validation.csv --n 16315

Options may also come from a YAML file (``--config``); flags override it.
Exit codes: 0 success, 1 estimation failure, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from pathlib import Path

import numpy as np
import yaml

from .bootstrap import BootstrapError, InvalidRatesError, PlanError, WildWeights
from .design import DesignError, SingularDesignError, fit_dataset
from .io import (
    DataError,
    coefficient_names,
    config_hash,
    format_estimates,
    ingest_csv,
    read_rates_file,
    resolve_design,
    write_records,
)
from .methods import DISPLAY, SIX_METHODS, check_methods, run_methods
from .misclass import MisclassRates, RatesError, kappa, rates_from_summary
from .montecarlo import CellAbortedError, SimConfigError, preset_grid, run_table

EXIT_OK, EXIT_ESTIMATION, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Invalid or incomplete command-line / config-file options."""


#: errors raised while estimating on valid input
ESTIMATION_ERRORS = (SingularDesignError, InvalidRatesError, BootstrapError, CellAbortedError, np.linalg.LinAlgError)
#: errors caused by bad configuration or input files
CONFIG_ERRORS = (ConfigError, DataError, DesignError, RatesError, PlanError, SimConfigError, yaml.YAMLError,
                 OSError, KeyError, ValueError)


def _split(v) -> list[str]:
    if v is None:
        return []
    if isinstance(v, str):
        return [s.strip() for s in v.split(",") if s.strip()]
    return [str(s) for s in v]


def load_config(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} not found")
    cfg = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {p} must hold a mapping at top level")
    cfg = {str(k).replace("-", "_"): v for k, v in cfg.items()}
    # relative file paths are relative to the config file
    for key in ("data", "rates_file"):
        if isinstance(cfg.get(key), str) and not Path(cfg[key]).is_absolute():
            cfg[key] = str(p.parent / cfg[key])
    return cfg


def merged(args, cfg: dict, key: str, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return cfg.get(key, default)


def parse_rates(value) -> MisclassRates:
    """``"f_plus,f_minus,m"`` or a mapping with those keys."""
    if isinstance(value, dict):
        try:
            return rates_from_summary(value["f_plus"], value["f_minus"], value["m"])
        except KeyError as exc:
            raise ConfigError(f"rates mapping needs f_plus, f_minus and m (missing {exc})") from None
    parts = _split(value)
    if len(parts) != 3:
        raise ConfigError(f"--rates expects 'f_plus,f_minus,m', got {value!r}")
    try:
        fp, fm = float(parts[0]), float(parts[1])
        m = float(parts[2])
    except ValueError:
        raise ConfigError(f"--rates values must be numeric, got {value!r}") from None
    if m != int(m):
        raise ConfigError(f"external sample size m must be an integer, got {parts[2]!r}")
    return rates_from_summary(fp, fm, int(m))


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _write_text(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


# ----------------------------------------------------------------------


def cmd_estimate(args) -> int:
    cfg = load_config(args.config)
    data_path = merged(args, cfg, "data")
    outcome = merged(args, cfg, "outcome")
    label = merged(args, cfg, "label")
    if not data_path or not outcome or not label:
        raise ConfigError("estimate needs --data, --outcome and --label (flags or config)")
    covariates = _split(merged(args, cfg, "covariates"))
    fixed_effects = _split(merged(args, cfg, "fixed_effects"))
    design_desc = merged(args, cfg, "design", "additive")
    methods = check_methods(_split(merged(args, cfg, "method")) or list(SIX_METHODS))
    B = int(merged(args, cfg, "boot_reps", 499))
    alpha = float(merged(args, cfg, "alpha", 0.05))
    seed = int(merged(args, cfg, "seed", 0))
    weights = WildWeights(merged(args, cfg, "weights", WildWeights.STANDARD_NORMAL.value))
    out = merged(args, cfg, "out")
    save_draws = bool(merged(args, cfg, "save_draws", False))

    rates_file = merged(args, cfg, "rates_file")
    rates_value = merged(args, cfg, "rates")
    if (rates_file is None) == (rates_value is None):
        raise ConfigError("give exactly one of --rates (f_plus,f_minus,m) or --rates-file")
    rates = read_rates_file(rates_file) if rates_file else parse_rates(rates_value)

    data, report = ingest_csv(data_path, outcome, label, covariates, fixed_effects)
    if report.rows_dropped:
        print(f"dropped {report.rows_dropped} of {report.rows_read} rows with missing cells", file=sys.stderr)
    spec = resolve_design(design_desc, data.columns or ())
    coef_names = coefficient_names(spec, data.columns or (), label)

    resolved = {
        "mode": "estimate",
        "data_sha256": _file_digest(data_path),
        "outcome": outcome,
        "label": label,
        "covariates": covariates,
        "fixed_effects": fixed_effects,
        "design": design_desc,
        "rates": {"f_plus": rates.f_plus, "f_minus": rates.f_minus, "m": rates.m},
        "methods": list(methods),
        "B": B,
        "alpha": alpha,
        "seed": seed,
        "weights": weights.value,
    }
    chash = config_hash(resolved)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        kp, km = kappa(rates, data.n)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    fit = fit_dataset(data, spec)
    results = run_methods(
        data, spec, rates, methods, B=B, seed=seed, alpha=alpha, weights=weights,
        workers=merged(args, cfg, "workers"), fit=fit,
    )
    rows = []
    for meth, res in results.items():
        for j, name in enumerate(coef_names):
            rows.append(
                {
                    "method": meth,
                    "coef": name,
                    "estimate": float(res.estimate[j]),
                    "ci_lo": float(res.ci[j, 0]),
                    "ci_hi": float(res.ci[j, 1]),
                    "n": data.n,
                    "B": B if res.draws is not None else None,
                }
            )
    coefs = _split(merged(args, cfg, "coef")) or coef_names
    unknown = [c for c in coefs if c not in coef_names]
    if unknown:
        raise ConfigError(f"unknown coefficient(s) {unknown}; design has {coef_names}")
    text = format_estimates([r for r in rows if r["coef"] in coefs], DISPLAY, alpha)
    header = (
        f"n = {data.n}, pi_hat = {data.pi_hat:.4f}, F_plus = {rates.f_plus:g}, F_minus = {rates.f_minus:g}, "
        f"m = {rates.m}, kappa = ({kp:.4f}, {km:.4f}), B = {B}, seed = {seed}, config {chash}\n"
    )
    print(header + text)
    if out:
        od = Path(out)
        od.mkdir(parents=True, exist_ok=True)
        write_records(od / "estimates.jsonl", rows, chash, seed)
        _write_text(od / "estimates.txt", header + text)
        diag = [{"kind": "ingest", **report.to_dict(), "path": Path(report.path).name}]
        diag.append({"kind": "resolved_config", **resolved})
        for meth, res in results.items():
            if res.draws is not None:
                diag.append({"kind": "bootstrap", "method": meth, **res.draws.diagnostics})
        write_records(od / "diagnostics.jsonl", diag, chash, seed)
        if save_draws:
            for meth, res in results.items():
                if res.draws is not None:
                    np.savetxt(
                        od / f"draws_{meth}.csv", res.draws.deltas, delimiter=",", fmt="%.17g",
                        header=",".join(coef_names), comments="",
                    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    preset = merged(args, cfg, "preset", "smoke")
    seed = int(merged(args, cfg, "seed", 20260423))
    overrides = {}
    for key, name in (("n", "n"), ("kappa", "kappa"), ("p_bar", "p_bar"), ("reps", "reps"), ("boot_reps", "B"),
                      ("alpha", "alpha"), ("m", "m")):
        v = merged(args, cfg, key)
        if v is not None:
            overrides[name] = v
    methods = _split(merged(args, cfg, "method"))
    if methods:
        overrides["methods"] = tuple(check_methods(methods))
    grid = preset_grid(preset, seed=seed, **overrides)
    resolved = {"mode": "simulate", "preset": preset, "cells": [c.to_dict() for c in grid]}
    chash = config_hash(resolved)

    def progress(done, total):
        if not args.quiet and (done % 50 == 0 or done == total):
            print(f"  {done}/{total} reps", file=sys.stderr)

    table = run_table(grid, workers=merged(args, cfg, "workers"), progress=progress)
    print(table.text)
    failed = sum(c.failed_reps for c in table.cells)
    if failed:
        print(f"warning: {failed} Monte Carlo replications failed and were skipped", file=sys.stderr)
    out = merged(args, cfg, "out")
    if out:
        od = Path(out)
        od.mkdir(parents=True, exist_ok=True)
        recs = [{"kind": "config", **resolved}] + table.records
        write_records(od / "cells.jsonl", recs, chash, seed)
        _write_text(od / "table.txt", table.text)
    return EXIT_OK


def cmd_rates(args) -> int:
    cfg = load_config(args.config)
    rf = merged(args, cfg, "rates_file")
    rv = merged(args, cfg, "rates")
    if (rf is None) == (rv is None):
        raise ConfigError("give exactly one of --rates or --rates-file")
    rates = read_rates_file(rf) if rf else parse_rates(rv)
    rec = {"f_plus": rates.f_plus, "f_minus": rates.f_minus, "m": rates.m}
    n = merged(args, cfg, "n")
    if n is not None:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rec["kappa_plus"], rec["kappa_minus"] = kappa(rates, int(n))
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        rec["n"] = int(n)
    print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="labelboot", description="Bootstrap inference with AI/ML-generated binary labels.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file with option values (flags override)")
    common.add_argument("--seed", type=int)
    common.add_argument("--alpha", type=float, help="1 - confidence level (default 0.05)")
    common.add_argument("--boot-reps", dest="boot_reps", type=int, help="bootstrap replications B")
    common.add_argument("--method", help=f"comma-separated subset of {', '.join(DISPLAY)}")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, help="worker threads (default: LABELBOOT_WORKERS or 1)")

    e = sub.add_parser("estimate", parents=[common], help="estimate on a CSV file")
    e.add_argument("--data", help="input CSV with a header row")
    e.add_argument("--outcome")
    e.add_argument("--label", help="imputed 0/1 label column")
    e.add_argument("--covariates", help="comma-separated numeric columns (include any intercept column)")
    e.add_argument("--fixed-effects", dest="fixed_effects", help="comma-separated categorical columns")
    e.add_argument("--design", help="'additive' (default) or 'interaction:<cols>'; custom recipes via --config")
    e.add_argument("--rates", help="f_plus,f_minus,m")
    e.add_argument("--rates-file", dest="rates_file", help="CSV of validation pairs (theta, theta_hat)")
    e.add_argument("--weights", choices=[w.value for w in WildWeights])
    e.add_argument("--coef", help="coefficients to show in the text table (default all)")
    e.add_argument("--save-draws", dest="save_draws", action="store_true", default=None)
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", parents=[common], help="run Monte Carlo coverage experiments")
    s.add_argument("--preset", help="smoke, table1-desk, table2-desk, table1, table2")
    s.add_argument("--n", type=int, help="run a single sample size")
    s.add_argument("--kappa", type=float)
    s.add_argument("--p-bar", dest="p_bar", type=float)
    s.add_argument("--m", type=int)
    s.add_argument("--reps", type=int)
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("rates", help="summarize misclassification rates")
    r.add_argument("--config")
    r.add_argument("--rates")
    r.add_argument("--rates-file", dest="rates_file")
    r.add_argument("--n", type=int, help="regression sample size for kappa")
    r.set_defaults(func=cmd_rates)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ESTIMATION_ERRORS as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
