"""Monte Carlo coverage experiments for the interactions design.

Data are generated as

    Y = 10 + theta * Z + Z + (0.3 + 0.2 * theta) * u,   Z, u ~ N(0, 1)

with ``P(theta = 1 | Z) = p~ = p * 2 (p_bar - F) + F`` and ``p`` the chi-square(1)
CDF of ``Z**2``. The label pair ``(theta, theta_hat)`` has false-positive and
false-negative mass ``F = kappa / sqrt(n)`` each. The coefficient of interest
is the slope on ``theta * Z`` (true value 1).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erf

from .bootstrap.engine import default_workers
from .design import Dataset, DesignSpec, fit_dataset
from .methods import DISPLAY, SIX_METHODS, check_methods, run_methods
from .misclass import estimate_rates
from .rng import Purpose, Streams

#: X = (1, theta * z, z)
SIM_SPEC = DesignSpec.from_recipes(("1", "0", 0), ("1", 0, 0), names=("const", "theta_x_z", "z"))
SLOPE_INDEX = 1
TRUE_SLOPE = 1.0
ROOT_N_OVER_M = 0.1265


class SimConfigError(ValueError):
    pass


class CellAbortedError(RuntimeError):
    pass


def external_size(n: int) -> int:
    """External sample size keeping sqrt(n)/m at 0.1265."""
    return int(round(math.sqrt(n) / ROOT_N_OVER_M))


@dataclass(frozen=True)
class SimConfig:
    n: int = 8000
    kappa: float = 1.0
    p_bar: float = 0.5
    m: int | None = None
    reps: int = 2000
    B: int = 299
    seed: int = 20260423
    methods: tuple[str, ...] = SIX_METHODS
    alpha: float = 0.05

    def __post_init__(self):
        if self.m is None:
            object.__setattr__(self, "m", external_size(self.n))
        object.__setattr__(self, "methods", check_methods(tuple(self.methods)))
        if self.n < 4:
            raise SimConfigError(f"n must be at least 4, got {self.n}")
        if self.reps < 1:
            raise SimConfigError(f"reps must be >= 1, got {self.reps}")
        if self.B < 2:
            raise SimConfigError(f"B must be >= 2, got {self.B}")
        if not 0.0 < self.p_bar < 1.0:
            raise SimConfigError(f"p_bar must be in (0, 1), got {self.p_bar}")
        if self.kappa < 0:
            raise SimConfigError(f"kappa must be >= 0, got {self.kappa}")
        F = self.rate
        if not 2.0 * (self.p_bar - F) > 0:
            raise SimConfigError(f"F = kappa/sqrt(n) = {F:.4g} must be below p_bar = {self.p_bar}")
        # the largest p~ is 2 p_bar - F, so P(0, 0) >= 0 needs p_bar <= 1/2
        if 2.0 * self.p_bar > 1.0 + 1e-12:
            raise SimConfigError(
                f"p_bar = {self.p_bar} too large: P(theta=0, theta_hat=0) would be negative"
            )

    @property
    def rate(self) -> float:
        return self.kappa / math.sqrt(self.n)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        return d


def chi2_1_cdf(x):
    """CDF of a chi-square(1) variable, ``erf(sqrt(x / 2))``."""
    return erf(np.sqrt(np.asarray(x, dtype=float) / 2.0))


def label_pair_probs(p_tilde, F_plus: float, F_minus: float) -> np.ndarray:
    """Joint probabilities ``(P11, P10, P01, P00)`` of ``(theta, theta_hat)``, shape ``(n, 4)``."""
    p_tilde = np.asarray(p_tilde, dtype=float)
    probs = np.stack(
        [p_tilde - F_minus, np.full_like(p_tilde, F_minus), np.full_like(p_tilde, F_plus),
         1.0 - p_tilde - F_plus],
        axis=-1,
    )
    if np.any(probs < -1e-15):
        raise SimConfigError("label pair probability negative; need p~ >= F_minus and p~ <= 1 - F_plus")
    return probs


def _draw_pairs(rng: np.random.Generator, n: int, p_bar: float, F: float):
    Z = rng.standard_normal(n)
    p = chi2_1_cdf(Z**2)
    p_tilde = p * 2.0 * (p_bar - F) + F
    probs = label_pair_probs(p_tilde, F, F)
    c = np.cumsum(probs[:, :3], axis=1)
    U = rng.random(n)
    theta = (U < c[:, 1]).astype(np.int8)
    theta_hat = ((U < c[:, 0]) | ((U >= c[:, 1]) & (U < c[:, 2]))).astype(np.int8)
    return Z, theta, theta_hat


def simulate_dataset(config: SimConfig, rep_index: int, streams: Streams | None = None):
    """One regression sample (with true labels) and one external validation sample."""
    streams = Streams(config.seed) if streams is None else streams
    rs = streams.child(rep_index)
    g = rs.generator(Purpose.DATA)
    n, F = config.n, config.rate
    Z, theta, theta_hat = _draw_pairs(g, n, config.p_bar, F)
    u = g.standard_normal(n)
    y = 10.0 + theta * Z + Z + (0.3 + 0.2 * theta) * u
    data = Dataset(y=y, Z=Z[:, None], theta_hat=theta_hat, theta_true=theta, columns=("z",))
    ge = rs.generator(Purpose.EXTERNAL)
    _, ext_theta, ext_theta_hat = _draw_pairs(ge, config.m, config.p_bar, F)
    return data, (ext_theta, ext_theta_hat)


@dataclass
class MethodStats:
    median_bias: float
    coverage: float
    median_length: float
    reps: int


@dataclass
class CellResult:
    config: SimConfig
    stats: dict[str, MethodStats]
    reps_completed: int
    failed_reps: int
    rejected_replications: int
    wall_time: float
    errors: list[str] = field(default_factory=list)

    def records(self) -> list[dict]:
        c = self.config
        return [
            {
                "kind": "cell",
                "n": c.n,
                "kappa": c.kappa,
                "p_bar": c.p_bar,
                "m": c.m,
                "method": meth,
                "median_bias": s.median_bias,
                "coverage": s.coverage,
                "median_length": s.median_length,
                "reps": s.reps,
                "B": c.B,
                "seed": c.seed,
            }
            for meth, s in self.stats.items()
        ]


def run_rep(config: SimConfig, r: int) -> dict:
    """Per-method slope estimate and interval for Monte Carlo replication ``r``."""
    streams = Streams(config.seed)
    data, (et, eth) = simulate_dataset(config, r, streams)
    rates = estimate_rates(et, eth)
    fit = fit_dataset(data, SIM_SPEC)
    res = run_methods(
        data,
        SIM_SPEC,
        rates,
        config.methods,
        B=config.B,
        seed=config.seed,
        alpha=config.alpha,
        workers=1,
        path=(r,),
        fit=fit,
    )
    out = {}
    rejected = 0
    for meth, mr in res.items():
        lo, hi = mr.ci[SLOPE_INDEX]
        out[meth] = (float(mr.estimate[SLOPE_INDEX]), float(lo), float(hi))
        if mr.draws is not None:
            rejected += mr.draws.rejected
    return {"rep": r, "methods": out, "rejected": rejected}


def run_cell(config: SimConfig, workers: int | None = None, progress=None) -> CellResult:
    workers = default_workers() if workers is None else max(1, int(workers))
    t0 = time.perf_counter()

    def one(r):
        try:
            return run_rep(config, r)
        except Exception as exc:  # counted, cell aborts past 1%
            return {"rep": r, "error": f"{type(exc).__name__}: {exc}"}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(one, range(config.reps)))
    else:
        results = []
        for r in range(config.reps):
            results.append(one(r))
            if progress is not None:
                progress(r + 1, config.reps)
    errors = [f"rep {x['rep']}: {x['error']}" for x in results if "error" in x]
    ok = [x for x in results if "error" not in x]
    if len(errors) > 0.01 * config.reps:
        raise CellAbortedError(
            f"{len(errors)} of {config.reps} replications failed; first: {errors[0]}"
        )
    stats = {}
    for meth in config.methods:
        est = np.array([x["methods"][meth][0] for x in ok])
        lo = np.array([x["methods"][meth][1] for x in ok])
        hi = np.array([x["methods"][meth][2] for x in ok])
        stats[meth] = MethodStats(
            median_bias=float(np.median(est - TRUE_SLOPE)),
            coverage=float(np.mean((lo <= TRUE_SLOPE) & (TRUE_SLOPE <= hi))),
            median_length=float(np.median(hi - lo)),
            reps=len(ok),
        )
    return CellResult(
        config=config,
        stats=stats,
        reps_completed=len(ok),
        failed_reps=len(errors),
        rejected_replications=sum(x["rejected"] for x in ok),
        wall_time=time.perf_counter() - t0,
        errors=errors,
    )


# ----------------------------------------------------------------------
# grids and tables

PRESETS = {
    "table1": dict(p_bar=0.5, reps=10_000, B=499),
    "table2": dict(p_bar=0.05, reps=10_000, B=499),
    "table1-desk": dict(p_bar=0.5, reps=2000, B=299),
    "table2-desk": dict(p_bar=0.05, reps=2000, B=299),
}
GRID_N = (8000, 16000, 32000)
GRID_KAPPA = (0.5, 1.0, 1.5)


def preset_grid(name: str, seed: int = 20260423, **overrides) -> list[SimConfig]:
    if name == "smoke":
        base = dict(n=2000, kappa=1.0, p_bar=0.5, reps=50, B=99, seed=seed)
        base.update(overrides)
        return [SimConfig(**base)]
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS) + ['smoke']}")
    base = dict(PRESETS[name], seed=seed)
    ns = _as_tuple(overrides.pop("n", GRID_N))
    kappas = _as_tuple(overrides.pop("kappa", GRID_KAPPA))
    base.update(overrides)
    return [SimConfig(n=int(n), kappa=float(k), **base) for n in ns for k in kappas]


def _as_tuple(v) -> tuple:
    return tuple(v) if isinstance(v, (list, tuple)) else (v,)


@dataclass
class TableResult:
    cells: list[CellResult]
    records: list[dict]
    text: str


def format_table(cells: Sequence[CellResult]) -> str:
    """Aligned text: one block per (p_bar, n), method rows, three statistics by kappa."""
    if not cells:
        return ""
    lines = []
    for p_bar in sorted({c.config.p_bar for c in cells}, reverse=True):
        sub = [c for c in cells if c.config.p_bar == p_bar]
        kappas = sorted({c.config.kappa for c in sub})
        methods = list(dict.fromkeys(m for c in sub for m in c.stats))
        width = max(len(DISPLAY.get(m, m)) for m in methods) + 2
        lines.append(f"Interactions model, p_bar = {p_bar:g}")
        kh = "".join(f"{k:>8g}" for k in kappas)
        lines.append(
            " " * width
            + f"{'Median bias':^{8 * len(kappas)}}|{'Coverage (%)':^{8 * len(kappas)}}|"
            + f"{'Interval length':^{8 * len(kappas)}}"
        )
        lines.append(f"{'kappa =':<{width}}{kh}|{kh}|{kh}")
        for n in sorted({c.config.n for c in sub}):
            lines.append(f"n = {n:,}")
            by_k = {c.config.kappa: c for c in sub if c.config.n == n}
            for m in methods:
                cols = [[], [], []]
                for k in kappas:
                    s = by_k[k].stats.get(m) if k in by_k else None
                    if s is None:
                        for col in cols:
                            col.append(f"{'':>8}")
                        continue
                    cols[0].append(f"{s.median_bias:>8.2f}")
                    cols[1].append(f"{100 * s.coverage:>8.1f}")
                    cols[2].append(f"{s.median_length:>8.2f}")
                lines.append(f"{DISPLAY.get(m, m):<{width}}" + "|".join("".join(c) for c in cols))
        lines.append("")
    return "\n".join(lines)


def run_table(configs: Iterable[SimConfig], workers: int | None = None, progress=None) -> TableResult:
    configs = list(configs)
    if not configs:
        raise SimConfigError("empty grid")
    cells = [run_cell(c, workers=workers, progress=progress) for c in configs]
    records = [rec for c in cells for rec in c.records()]
    return TableResult(cells=cells, records=records, text=format_table(cells))
