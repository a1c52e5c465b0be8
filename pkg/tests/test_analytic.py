import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from labelboot.analytic import bchs_correct, bchs_report, bchs_variance, gammas, ols_ci, wald_ci
from labelboot.design import BiasMatrices, DesignSpec, OlsFit, bias_matrices, build_design, fit_dataset, ols_fit
from labelboot.misclass import MisclassRates, rates_from_summary
from labelboot.montecarlo import SIM_SPEC


def scalar_fit(Q, Sigma, beta, n):
    return OlsFit(
        beta_hat=np.array([beta]),
        residuals=np.zeros(n),
        Q_hat=np.array([[Q]]),
        Q_hat_inv=np.array([[1.0 / Q]]),
        sigma_hat=np.array([[Sigma]]),
    )


def test_zero_rates_leave_beta_unchanged(sim_small):
    _, data, _ = sim_small
    fit = fit_dataset(data, SIM_SPEC)
    bm = bias_matrices(data.Z, SIM_SPEC)
    zero = rates_from_summary(0, 0, 100)
    assert np.array_equal(bchs_correct(fit, bm, zero), fit.beta_hat)
    assert np.array_equal(bchs_variance(fit, bm, zero), fit.sandwich() / fit.n)


def test_scalar_correction():
    fit = scalar_fit(2.0, 1.0, 1.0, 10)
    bm = BiasMatrices(np.array([[1.0]]), np.array([[0.0]]))
    r = MisclassRates(0.1, 0.0, 50)
    assert bchs_correct(fit, bm, r) == pytest.approx([1.05], abs=1e-15)


def test_scalar_variance():
    n, m = 10000, 1000
    fit = scalar_fit(1.0, 1.0, 1.0, n)
    bm = BiasMatrices(np.array([[1.0]]), np.array([[0.0]]))
    r = MisclassRates(0.01, 0.0, m)
    v = bchs_variance(fit, bm, r, beta_for_bias=[1.0])
    assert v[0, 0] == pytest.approx((1 + 10000 * 0.01 * 0.99 / 1000) / n, rel=1e-12)
    assert v[0, 0] == pytest.approx(1.099 / n, rel=1e-12)


def test_doubling_m_halves_adjustment(sim_small):
    _, data, _ = sim_small
    fit = fit_dataset(data, SIM_SPEC)
    bm = bias_matrices(data.Z, SIM_SPEC)
    a = bchs_report(fit, bm, MisclassRates(0.02, 0.03, 500))
    b = bchs_report(fit, bm, MisclassRates(0.02, 0.03, 1000))
    assert np.allclose(b.var_adjustment, a.var_adjustment / 2, rtol=1e-12, atol=0)


def test_wald_examples():
    assert np.allclose(wald_ci([0.0], [1.0], 0.05), [[-1.959963984540054, 1.959963984540054]])
    ci = wald_ci([0.0], np.array([[4.0]]), 0.32)
    assert (ci[0, 1] - ci[0, 0]) / 2 == pytest.approx(norm.ppf(0.84) * 2, rel=1e-12)
    assert norm.ppf(0.84) == pytest.approx(0.994, abs=5e-4)
    assert np.array_equal(wald_ci([3.0], [0.0]), [[3.0, 3.0]])
    with pytest.raises(ValueError, match="negative variance"):
        wald_ci([0.0, 0.0], np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        wald_ci([0.0], [1.0], 1.5)


def test_report_consistency(sim_small):
    _, data, ext = sim_small
    from labelboot.misclass import estimate_rates

    r = estimate_rates(*ext)
    fit = fit_dataset(data, SIM_SPEC)
    bm = bias_matrices(data.Z, SIM_SPEC)
    rep = bchs_report(fit, bm, r)
    gp, gm = gammas(fit, bm)
    assert np.array_equal(rep.beta_bc, (np.eye(3) + gp * r.f_plus + gm * r.f_minus) @ fit.beta_hat)
    assert np.allclose(rep.variance, bchs_variance(fit, bm, r, rep.beta_bc), rtol=1e-14)
    assert np.linalg.eigvalsh(rep.var_adjustment).min() >= -1e-15
    assert np.allclose(rep.ci, wald_ci(rep.beta_bc, rep.variance))
    assert np.allclose(ols_ci(fit), wald_ci(fit.beta_hat, fit.sandwich() / fit.n))


def test_equivariance_in_y(sim_small):
    _, data, _ = sim_small
    X = build_design(data.theta_hat, data.Z, SIM_SPEC)
    bm = bias_matrices(data.Z, SIM_SPEC)
    r = MisclassRates(0.02, 0.01, 400)
    a = bchs_report(ols_fit(X, data.y), bm, r)
    b = bchs_report(ols_fit(X, 10 * data.y), bm, r)
    assert np.allclose(b.beta_bc, 10 * a.beta_bc, rtol=1e-10)
    assert np.allclose(b.variance, 100 * a.variance, rtol=1e-9)


def test_additive_minus_zero_matches_brute_force(rng):
    n = 300
    Z = np.column_stack([np.ones(n), rng.standard_normal(n)])
    th = (rng.random(n) < 0.3).astype(int)
    y = 1 + 0.5 * th + Z[:, 1] + rng.standard_normal(n)
    spec = DesignSpec.additive()
    X = build_design(th, Z, spec)
    fit = ols_fit(X, y)
    bm = bias_matrices(Z, spec)
    r = MisclassRates(0.05, 0.0, 200)
    G0 = np.column_stack([np.zeros(n), Z])
    G1 = np.column_stack([np.ones(n), Z])
    Dp = sum(np.outer(G1[i], G1[i] - G0[i]) for i in range(n)) / n
    want = fit.beta_hat + np.linalg.inv(X.T @ X / n) @ Dp @ fit.beta_hat * 0.05
    assert np.allclose(bchs_correct(fit, bm, r), want, rtol=1e-10)
    # D+ has a nonzero first column only, so the shift is Gamma+ e_1 * F+ * beta_theta
    assert np.all(Dp[:, 1:] == 0)


@given(st.floats(0, 0.3), st.floats(0, 0.3), st.integers(1, 5000))
def test_variance_dominates_sandwich(fp, fm, m):
    rng = np.random.default_rng(0)
    n = 200
    Z = rng.standard_normal((n, 1))
    th = (rng.random(n) < 0.4).astype(int)
    X = build_design(th, Z, SIM_SPEC)
    fit = ols_fit(X, X @ [1.0, 1.0, 1.0] + rng.standard_normal(n))
    bm = bias_matrices(Z, SIM_SPEC)
    v = bchs_variance(fit, bm, MisclassRates(fp, fm, m), bchs_correct(fit, bm, MisclassRates(fp, fm, m)))
    diff = v - fit.sandwich() / n
    assert np.linalg.eigvalsh(0.5 * (diff + diff.T)).min() >= -1e-12 * np.abs(v).max()
