import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from labelboot.misclass import (
    MisclassRates,
    RateConsistencyWarning,
    RatesError,
    estimate_rates,
    kappa,
    rates_from_summary,
)

pairs = st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=200)


def test_nine_false_positives_in_thousand():
    theta = np.ones(1000, dtype=int)
    theta_hat = np.ones(1000, dtype=int)
    theta[:9] = 0  # theta = 0, theta_hat = 1
    r = estimate_rates(theta, theta_hat)
    assert r.f_plus == 0.009 and r.f_minus == 0.0 and r.m == 1000


def test_concordant_sample():
    r = estimate_rates([0, 1, 1, 0], [0, 1, 1, 0])
    assert r.f_plus == 0.0 and r.f_minus == 0.0 and r.is_zero


def test_hand_counted_pairs():
    t = [1] * 4 + [0] * 2 + [0] + [1]
    th = [1] * 4 + [0] * 2 + [1] + [0]
    r = estimate_rates(t, th)
    assert (r.f_plus, r.f_minus, r.m) == (0.125, 0.125, 8)


def test_errors():
    with pytest.raises(RatesError, match="empty"):
        estimate_rates([], [])
    with pytest.raises(RatesError, match="0/1"):
        estimate_rates([0, 2], [0, 1])
    with pytest.raises(RatesError, match="length"):
        estimate_rates([0, 1], [0])


@pytest.mark.parametrize("triple", [(0.009, 0.009, 1000), (0.009, 0.018, 1000), (0.0, 0.0, 5)])
def test_summary_valid(triple):
    r = rates_from_summary(*triple)
    assert (r.f_plus, r.f_minus, r.m) == triple


def test_summary_zero_kappa():
    r = rates_from_summary(0, 0, 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in (1, 10, 10_000):
            assert kappa(r, n) == (0.0, 0.0)


@pytest.mark.parametrize(
    "bad", [(-0.1, 0.0, 10), (0.0, 1.1, 10), (0.6, 0.6, 10), (0.1, 0.1, 0), (0.1, 0.1, 2.5)]
)
def test_summary_invalid(bad):
    with pytest.raises(RatesError):
        rates_from_summary(*bad)


def test_kappa_values():
    r = rates_from_summary(1 / math.sqrt(8000), 0.0, 707)
    assert kappa(r, 8000)[0] == pytest.approx(1.0, abs=1e-12)
    r = rates_from_summary(0.009, 0.009, 1000)
    assert r.kappa_plus(16315) == pytest.approx(0.009 * math.sqrt(16315), rel=1e-12)
    assert r.kappa_plus(16315) == pytest.approx(1.1495, abs=1e-4)


def test_kappa_warns_when_n_large():
    r = rates_from_summary(0.01, 0.01, 10)
    with pytest.warns(RateConsistencyWarning):
        kappa(r, 100)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        kappa(r, 99)


@given(pairs, st.randoms())
def test_permutation_invariance(ps, rnd):
    t, th = map(list, zip(*ps))
    a = estimate_rates(t, th)
    idx = list(range(len(t)))
    rnd.shuffle(idx)
    b = estimate_rates([t[i] for i in idx], [th[i] for i in idx])
    assert a == b


@given(pairs)
def test_discordance_identity(ps):
    t, th = map(np.array, zip(*ps))
    r = estimate_rates(t, th)
    assert r.f_plus + r.f_minus == pytest.approx(np.mean(t != th), abs=1e-15)


@given(st.floats(0, 0.5), st.floats(0, 0.5), st.integers(1, 10**6))
def test_kappa_scales_with_root_n(fp, fm, n):
    r = MisclassRates(fp, fm, 10**7)
    assert kappa(r, 4 * n)[0] == pytest.approx(2 * kappa(r, n)[0], rel=1e-12, abs=1e-300)
