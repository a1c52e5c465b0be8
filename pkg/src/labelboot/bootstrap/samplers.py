"""Label-pair samplers and wild weights.

Each sampler maps one uniform per observation to a bootstrap label pair, so
the engine and the stand-alone samplers share the exact same mapping. Branch
order for the coupled pmfs is ``(1,1), (1,0), (0,1), (0,0)`` over
``(theta*, theta_hat*)``.
"""

from __future__ import annotations

import numpy as np

from ..design import as_labels
from ..misclass import MisclassRates
from .plan import LabelPairDraw, WildWeights


class InvalidRatesError(ValueError):
    """Bootstrap label probabilities fall outside [0, 1]."""


BRANCHES = ((1, 1), (1, 0), (0, 1), (0, 0))
#: branch probabilities in [-PMF_TOL, 0) are rounding noise at the boundary and set to 0
PMF_TOL = 1e-12


def draw_wild_weights(n: int, law: WildWeights | str, rng: np.random.Generator) -> np.ndarray:
    law = WildWeights(law)
    if law is WildWeights.RADEMACHER:
        return 2.0 * rng.integers(0, 2, size=n).astype(float) - 1.0
    return rng.standard_normal(n)


def _check_pi(pi_hat: float):
    if not 0.0 < pi_hat < 1.0:
        raise InvalidRatesError(
            f"share of imputed ones pi_hat={pi_hat} is degenerate; need 0 < pi_hat < 1"
        )


def fixed_label_probs(f_plus: float, f_minus: float, pi_hat: float) -> tuple[float, float]:
    """Flip probabilities ``(P(1->0), P(0->1))`` for the fixed-label sampler."""
    _check_pi(pi_hat)
    down = f_minus / pi_hat
    up = f_plus / (1.0 - pi_hat)
    if not 0.0 <= down <= 1.0:
        raise InvalidRatesError(
            f"fixed-label branch theta_hat=1 -> 0 has probability f_minus/pi_hat={down:.6g}, outside [0, 1]"
        )
    if not 0.0 <= up <= 1.0:
        raise InvalidRatesError(
            f"fixed-label branch theta_hat=0 -> 1 has probability f_plus/(1-pi_hat)={up:.6g}, outside [0, 1]"
        )
    return down, up


def coupled_label_pmf(f_plus: float, f_minus: float, pi_hat: float) -> np.ndarray:
    """``2 x 4`` table; row ``t`` is the pmf over ``BRANCHES`` given ``theta_hat = t``."""
    _check_pi(pi_hat)
    odds = pi_hat / (1.0 - pi_hat)
    given1 = [1.0 - f_plus - f_minus / pi_hat, f_minus, f_plus, f_minus / odds]
    given0 = [f_plus * odds, f_minus, f_plus, 1.0 - f_plus / (1.0 - pi_hat) - f_minus]
    pmf = np.array([given0, given1])
    pmf[(pmf < 0) & (pmf >= -PMF_TOL)] = 0.0
    neg = pmf < 0
    if neg.any():
        t, j = map(int, np.argwhere(neg)[0])
        raise InvalidRatesError(
            f"coupled-label branch (theta*, theta_hat*)={BRANCHES[j]} given theta_hat={t} has "
            f"probability {pmf[t, j]:.6g} < 0; need f_plus + f_minus/pi_hat <= 1 and "
            f"f_plus/(1-pi_hat) + f_minus <= 1"
        )
    return pmf


def coupled_thresholds(f_plus, f_minus, pi_hat: float) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative branch thresholds ``(c1, c2, c3)`` per stratum.

    ``f_plus``/``f_minus`` may be arrays (one rate pair per replication); the
    results then have shape ``(len, 3)``.
    """
    fp = np.atleast_1d(np.asarray(f_plus, dtype=float))
    fm = np.atleast_1d(np.asarray(f_minus, dtype=float))
    for a, b in zip(fp, fm):
        coupled_label_pmf(a, b, pi_hat)
    odds = pi_hat / (1.0 - pi_hat)
    c1_one = np.maximum(1.0 - fp - fm / pi_hat, 0.0)
    c1_zero = fp * odds
    t1 = np.column_stack([c1_one, c1_one + fm, c1_one + fm + fp])
    t0 = np.column_stack([c1_zero, c1_zero + fm, c1_zero + fm + fp])
    return t0, t1


def coupled_branch(u, c1, c2, c3) -> tuple[np.ndarray, np.ndarray]:
    """Branch selection: ``u < c1`` -> (1,1), ``< c2`` -> (1,0), ``< c3`` -> (0,1), else (0,0)."""
    theta_star = u < c2
    theta_hat_star = (u < c1) | ((u >= c2) & (u < c3))
    return theta_star.astype(np.int8), theta_hat_star.astype(np.int8)


def coupled_pairs(u: np.ndarray, theta_hat: np.ndarray, t0, t1) -> tuple[np.ndarray, np.ndarray]:
    """Map uniforms to ``(theta*, theta_hat*)``.

    ``u`` has shape ``(n,)`` or ``(R, n)``; ``t0``/``t1`` hold threshold triples
    of shape ``(3,)`` or ``(R, 3)`` (one per replication).
    """
    t0 = np.atleast_2d(t0)
    t1 = np.atleast_2d(t1)
    one = theta_hat == 1
    c1, c2, c3 = (np.where(one, t1[:, j : j + 1], t0[:, j : j + 1]) for j in range(3))
    if u.ndim == 1:
        c1, c2, c3 = c1[0], c2[0], c3[0]
    return coupled_branch(u, c1, c2, c3)


def fixed_pairs(u: np.ndarray, theta_hat: np.ndarray, down: float, up: float):
    flip = np.where(theta_hat == 1, u < down, u < up)
    theta_hat_star = np.where(flip, 1 - theta_hat, theta_hat).astype(np.int8)
    return np.broadcast_to(theta_hat, np.shape(u)).astype(np.int8), theta_hat_star


def sample_fixed_label(
    theta_hat, rates: MisclassRates, pi_hat: float, rng: np.random.Generator
) -> LabelPairDraw:
    th = as_labels(theta_hat, "theta_hat")
    down, up = fixed_label_probs(rates.f_plus, rates.f_minus, pi_hat)
    u = rng.random(th.shape[0])
    ts, ths = fixed_pairs(u, th, down, up)
    return LabelPairDraw(ts, ths, rates.f_plus, rates.f_minus)


def sample_coupled_label(
    theta_hat, rates_star: tuple[float, float], pi_hat: float, rng: np.random.Generator
) -> LabelPairDraw:
    th = as_labels(theta_hat, "theta_hat")
    fp, fm = map(float, rates_star)
    t0, t1 = coupled_thresholds(fp, fm, pi_hat)
    u = rng.random(th.shape[0])
    ts, ths = coupled_pairs(u, th, t0[0], t1[0])
    return LabelPairDraw(ts, ths, fp, fm)


def draw_rate_star(rates: MisclassRates, rng: np.random.Generator) -> tuple[float, float]:
    """One ``(f+*, f-*)`` pair: independent ``Binomial(m, F_hat)/m`` draws."""
    m = rates.m
    vp = rng.binomial(m, rates.f_plus)
    vm = rng.binomial(m, rates.f_minus)
    return vp / m, vm / m


def coupled_rates_valid(f_plus, f_minus, pi_hat: float):
    """True where every coupled-label branch probability is nonnegative (up to ``PMF_TOL``)."""
    return (1.0 - f_plus - f_minus / pi_hat >= -PMF_TOL) & (1.0 - f_plus / (1.0 - pi_hat) - f_minus >= -PMF_TOL)


def draw_valid_rate_star(
    rates: MisclassRates, pi_hat: float, rng: np.random.Generator, max_draws: int = 1000
) -> tuple[float, float, int]:
    """Draw ``(f+*, f-*)`` until the coupled pmf is valid; also return the redraw count.

    With a rare label the Binomial draw of ``f-*`` can exceed ``pi_hat``, which
    leaves no room for the ``(1, 1)`` branch. Such draws are discarded rather
    than clipped.
    """
    for k in range(max_draws):
        fp, fm = draw_rate_star(rates, rng)
        if coupled_rates_valid(fp, fm, pi_hat):
            return fp, fm, k
    raise InvalidRatesError(
        f"{max_draws} consecutive rate draws gave a negative coupled-label branch "
        f"(F_plus={rates.f_plus}, F_minus={rates.f_minus}, m={rates.m}, pi_hat={pi_hat:.6g})"
    )
