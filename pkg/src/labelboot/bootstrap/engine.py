"""Wild bootstrap with resampled binary labels.

One replication draws wild weights ``eta`` and a label pair
``(theta*, theta_hat*)`` per observation, generates

    Y*_i = beta_hat' g(theta*_i, Z_i) + u_hat_i * eta_i

and regresses ``Y*`` on ``g(theta_hat*_i, Z_i)``. Writing ``S = X_hat' X_hat``
and ``S* = X_hat*' X_hat*``, the draw ``beta* - beta_hat`` solves

    S* delta = X_hat*' u* - sum_i [FP_i D+_i + FN_i D-_i] beta_hat

and the rotated draw solves the same system with ``S`` in place of ``S*``.
``S*`` and ``X_hat*' u*`` are updated from the observed-label quantities
through the (sparse) set of observations whose imputed label changed, so a
replication with no label changes reproduces the no-resampling draw exactly.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..design import BiasMatrices, Dataset, DesignSpec, OlsFit, design_blocks
from ..misclass import MisclassRates
from ..rng import Purpose, Streams
from .diagnostics import l3_statistic, summarize
from .plan import BootstrapDraws, BootstrapPlan, LabelPairDraw, Scheme
from .samplers import (
    coupled_branch,
    coupled_thresholds,
    draw_valid_rate_star,
    draw_wild_weights,
    fixed_label_probs,
)

#: replications per work unit; fixed so results do not depend on worker count
CHUNK = 128
#: reciprocal condition number of a bootstrap Gram matrix below which the
#: replication is rejected and its labels redrawn
BOOT_RCOND_TOL = 1e-13


class BootstrapError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("LABELBOOT_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass
class _Rows:
    deltas: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    mismatch: np.ndarray
    fps: np.ndarray
    fms: np.ndarray
    l3: np.ndarray
    rejected: int
    rate_redraws: int = 0


class BootstrapEngine:
    """Precomputed per-dataset quantities shared by every replication and scheme."""

    def __init__(
        self,
        data: Dataset,
        spec: DesignSpec,
        fit: OlsFit,
        rates: MisclassRates,
        path: tuple[int, ...] = (),
    ):
        self.data = data
        self.rates = rates
        self.path = tuple(path)
        th = data.theta_hat
        self.theta_hat = th
        self.n = n = th.shape[0]
        self.pi_hat = float(th.mean())
        self._one = th == 1
        G0, G1 = design_blocks(data.Z, spec)
        self.k = k = G0.shape[1]
        if fit.k != k or fit.n != n:
            raise ValueError("fit does not match the dataset and design spec")
        delta = G1 - G0
        Xhat = np.where(th[:, None] == 1, G1, G0)
        self.beta_hat = fit.beta_hat
        self.S = Xhat.T @ Xhat
        self.H = (np.einsum("ij,ik->ijk", G1, G1) - np.einsum("ij,ik->ijk", G0, G0)).reshape(n, k * k)
        u = fit.residuals
        self.XU = Xhat * u[:, None]
        self.DU = delta * u[:, None]
        s = delta @ fit.beta_hat
        self.P = G1 * s[:, None]
        self.M = -G0 * s[:, None]
        self.vec_dp = np.einsum("ij,ik->ijk", G1, delta).reshape(n, k * k)
        self.vec_dm = -np.einsum("ij,ik->ijk", G0, delta).reshape(n, k * k)
        self.bm = BiasMatrices(G1.T @ delta / n, -(G0.T @ delta) / n)

    # ------------------------------------------------------------------
    def run(self, plans: Sequence[BootstrapPlan], workers: int | None = None) -> list[BootstrapDraws]:
        """Run several plans; plans sharing seed, B and weight law share random streams."""
        workers = default_workers() if workers is None else max(1, int(workers))
        out: list[BootstrapDraws | None] = [None] * len(plans)
        groups: dict[tuple, list[int]] = {}
        for i, p in enumerate(plans):
            groups.setdefault((int(p.seed), p.B, p.wild_weights), []).append(i)
        for (seed, B, law), idx in groups.items():
            group = [plans[i] for i in idx]
            for i, draws in zip(idx, self._run_group(group, seed, B, law, workers)):
                out[i] = draws
        return out  # type: ignore[return-value]

    def _run_group(self, plans, seed, B, law, workers):
        streams = Streams(seed, self.path)
        for p in plans:
            self._validate(p)
        bounds = [(b0, min(b0 + CHUNK, B)) for b0 in range(0, B, CHUNK)]

        def work(bd):
            return self._chunk(streams, plans, law, *bd)

        if workers > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(work, bounds))
        else:
            results = [work(bd) for bd in bounds]
        draws = []
        for j, plan in enumerate(plans):
            rows = [r[j] for r in results]
            cat = {f: np.concatenate([getattr(r, f) for r in rows]) for f in
                   ("deltas", "fp", "fn", "mismatch", "fps", "fms", "l3")}
            rejected = sum(r.rejected for r in rows)
            diag = summarize(cat["fp"], cat["fn"], cat["mismatch"], cat["l3"], self.n, rejected)
            diag["rate_redraws"] = int(sum(r.rate_redraws for r in rows))
            draws.append(
                BootstrapDraws(
                    plan=plan,
                    deltas=cat["deltas"],
                    n=self.n,
                    fp_count=cat["fp"],
                    fn_count=cat["fn"],
                    mismatch_count=cat["mismatch"],
                    f_plus_star=cat["fps"],
                    f_minus_star=cat["fms"],
                    l3=cat["l3"],
                    rejected=rejected,
                    diagnostics=diag,
                )
            )
        return draws

    def _validate(self, plan: BootstrapPlan):
        if plan.scheme is Scheme.FIXED_LABEL:
            fixed_label_probs(self.rates.f_plus, self.rates.f_minus, self.pi_hat)
        elif plan.scheme.coupled:
            coupled_thresholds(self.rates.f_plus, self.rates.f_minus, self.pi_hat)

    # ------------------------------------------------------------------
    def _rate_star(self, plan, streams, b, attempt):
        """``(f+*, f-*, redraws)`` for replication ``b``."""
        if plan.scheme is Scheme.COUPLED_LABEL_VARADJ:
            return draw_valid_rate_star(self.rates, self.pi_hat, streams.generator(Purpose.RATES, b, attempt))
        return self.rates.f_plus, self.rates.f_minus, 0

    def _support(self, plan, U, fps, fms):
        """Entries whose label pair differs from ``(theta_hat_i, theta_hat_i)``.

        Returns row and column indices (row-major order) with the pair values
        at those entries; every other entry keeps ``theta* = theta_hat* = theta_hat``.
        """
        th, one = self.theta_hat, self._one
        if plan.scheme is Scheme.NO_LABEL:
            e = np.zeros(0, dtype=np.intp)
            z = np.zeros(0, dtype=np.int8)
            return e, e, z, z
        n = self.n
        if plan.scheme is Scheme.FIXED_LABEL:
            down, up = fixed_label_probs(self.rates.f_plus, self.rates.f_minus, self.pi_hat)
            idx = np.flatnonzero(U < np.where(one, down, up))
            rows, cols = np.divmod(idx, n)
            ts = th[cols]
            return rows, cols, ts, (1 - ts).astype(np.int8)
        t0, t1 = coupled_thresholds(fps, fms, self.pi_hat)
        if plan.scheme is Scheme.COUPLED_LABEL:
            t0, t1 = t0[:1], t1[:1]
            lo = np.where(one, t1[0, 0], -1.0)
            hi = np.where(one, 2.0, t0[0, 2])
        else:
            lo = np.where(one, t1[:, 0:1], -1.0)
            hi = np.where(one, 2.0, t0[:, 2:3])
        idx = np.flatnonzero((U >= lo) & (U < hi))
        rows, cols = np.divmod(idx, n)
        r = rows if t0.shape[0] > 1 else np.zeros_like(rows)
        c = np.where(one[cols, None], t1[r], t0[r])
        ts, ths = coupled_branch(U.ravel()[idx], c[:, 0], c[:, 1], c[:, 2])
        return rows, cols, ts, ths

    def _solve(self, R, support, eta, xu, rotate):
        rows, cols, ts, ths = support
        th = self.theta_hat
        k = self.k
        th_c = th[cols]
        indptr = np.searchsorted(rows, np.arange(R + 1))

        def csr(data):
            return sp.csr_matrix((np.asarray(data, dtype=float), cols, indptr), shape=(R, self.n))

        d = (ths - th_c).astype(float)
        fp = ((ths == 1) & (ts == 0)).astype(float)
        fn = ((ts == 1) & (ths == 0)).astype(float)
        D, FP, FN = csr(d), csr(fp), csr(fn)
        S_star = self.S + np.asarray(D @ self.H).reshape(R, k, k)
        du = np.asarray(csr(d * eta[rows, cols]) @ self.DU)
        bias = np.asarray(FP @ self.P) + np.asarray(FN @ self.M)
        rhs = xu + du - bias
        with np.errstate(all="ignore"):
            sv = np.linalg.svd(S_star, compute_uv=False)
            rcond = sv[:, -1] / sv[:, 0]
        ok = np.isfinite(rcond) & (rcond >= BOOT_RCOND_TOL)
        A = np.broadcast_to(self.S, S_star.shape) if rotate else S_star
        if not ok.all():
            A = np.array(A)
            A[~ok] = np.eye(k)
        deltas = np.linalg.solve(A, rhs[..., None])[..., 0]
        l3 = l3_statistic(FP, FN, self.vec_dp, self.vec_dm, self.bm.D_plus_bar, self.bm.D_minus_bar, self.n)
        fpc = np.bincount(rows, weights=fp, minlength=R)
        fnc = np.bincount(rows, weights=fn, minlength=R)
        mism = np.bincount(rows, weights=(ts != th_c).astype(float), minlength=R)
        return deltas, fpc, fnc, mism, l3, ok

    def label_pairs(self, plan: BootstrapPlan, b: int, attempt: int = 0) -> LabelPairDraw:
        """The label pair drawn for replication ``b`` (first attempt by default)."""
        streams = Streams(plan.seed, self.path)
        fps, fms, _ = self._rate_star(plan, streams, b, attempt)
        U = streams.generator(Purpose.LABELS, b, attempt).random(self.n)[None, :]
        _, cols, ts, ths = self._support(plan, U, np.array([fps]), np.array([fms]))
        theta_star = self.theta_hat.copy()
        theta_hat_star = self.theta_hat.copy()
        theta_star[cols] = ts
        theta_hat_star[cols] = ths
        return LabelPairDraw(theta_star, theta_hat_star, float(fps), float(fms))

    def _chunk(self, streams, plans, law, b0, b1) -> list[_Rows]:
        n = self.n
        R = b1 - b0
        reps = range(b0, b1)
        eta = np.stack([draw_wild_weights(n, law, streams.generator(Purpose.WEIGHTS, b)) for b in reps])
        xu = eta @ self.XU
        need_u = any(p.scheme is not Scheme.NO_LABEL for p in plans)
        U = (
            np.stack([streams.generator(Purpose.LABELS, b, 0).random(n) for b in reps])
            if need_u
            else np.zeros((R, n))
        )
        out = []
        for plan in plans:
            rs = [self._rate_star(plan, streams, b, 0) for b in reps]
            fps = np.array([r[0] for r in rs], dtype=float)
            fms = np.array([r[1] for r in rs], dtype=float)
            support = self._support(plan, U, fps, fms)
            deltas, fpc, fnc, mism, l3, ok = self._solve(R, support, eta, xu, plan.rotate)
            redraws = sum(r[2] for r in rs)
            rejected = 0
            for r in np.flatnonzero(~ok):
                b = b0 + int(r)
                for attempt in range(1, plan.max_retries + 1):
                    rejected += 1
                    fp1, fm1, k = self._rate_star(plan, streams, b, attempt)
                    redraws += k
                    u1 = streams.generator(Purpose.LABELS, b, attempt).random(n)[None, :]
                    sup1 = self._support(plan, u1, np.array([fp1]), np.array([fm1]))
                    res = self._solve(1, sup1, eta[r : r + 1], xu[r : r + 1], plan.rotate)
                    if res[-1][0]:
                        deltas[r], fpc[r], fnc[r], mism[r], l3[r] = (x[0] for x in res[:5])
                        fps[r], fms[r] = fp1, fm1
                        break
                else:
                    raise BootstrapError(
                        f"replication {b} produced a singular bootstrap design "
                        f"{plan.max_retries + 1} times",
                        {"replication": b, "rejected": rejected, "pi_hat": self.pi_hat},
                    )
            out.append(_Rows(deltas, fpc, fnc, mism, fps, fms, l3, rejected, redraws))
        return out


def run_bootstrap(
    dataset: Dataset,
    spec: DesignSpec,
    fit: OlsFit,
    rates: MisclassRates,
    plan: BootstrapPlan,
    workers: int | None = None,
    path: tuple[int, ...] = (),
) -> BootstrapDraws:
    return BootstrapEngine(dataset, spec, fit, rates, path).run([plan], workers)[0]
