from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from labelboot.design import (
    Dataset,
    DesignError,
    DesignSpec,
    SingularDesignError,
    bias_matrices,
    build_design,
    design_blocks,
    fit_dataset,
    ols_fit,
)
from labelboot.montecarlo import SIM_SPEC

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def exact_ols(X, y):
    """(X'X)^-1 X'y in rational arithmetic via Gauss-Jordan elimination."""
    X = [[Fraction(v) for v in row] for row in X]
    y = [Fraction(v) for v in y]
    k = len(X[0])
    A = [[sum(X[i][a] * X[i][b] for i in range(len(X))) for b in range(k)] for a in range(k)]
    rhs = [sum(X[i][a] * y[i] for i in range(len(X))) for a in range(k)]
    M = [A[r] + [rhs[r]] for r in range(k)]
    for c in range(k):
        p = next(r for r in range(c, k) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [v / piv for v in M[c]]
        for r in range(k):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [float(M[r][k]) for r in range(k)]


# ---------------------------------------------------------------- build_design


def test_interaction_row():
    spec = DesignSpec.interaction([0], base=[1, 2])
    X = build_design([1], np.array([[2.0, 1.0, 3.0]]), spec)
    assert X.tolist() == [[2.0, 1.0, 3.0]]


def test_additive_row():
    X = build_design([0], np.array([[1.0, 5.0]]), DesignSpec.additive())
    assert X.tolist() == [[0.0, 1.0, 5.0]]


def test_simulation_design_row():
    z = 0.7
    X = build_design([1], np.array([[z]]), SIM_SPEC)
    assert X.tolist() == [[1.0, z, z]]
    assert build_design([0], np.array([[z]]), SIM_SPEC).tolist() == [[1.0, 0.0, z]]


def test_custom_recipes_unequal_length():
    with pytest.raises(DesignError, match="differ in length"):
        DesignSpec.from_recipes(("1", 0), ("1",))


def test_recipe_column_out_of_range():
    with pytest.raises(DesignError, match="column 3"):
        build_design([0, 1], np.zeros((2, 2)), DesignSpec.interaction([3]))


def test_dimension_mismatch():
    with pytest.raises(DesignError):
        build_design([0, 1, 1], np.zeros((2, 2)), DesignSpec.additive())


def test_non_binary_label():
    with pytest.raises(DesignError, match="0/1"):
        build_design([0, 2], np.zeros((2, 1)), DesignSpec.additive())


@given(arrays(float, (6, 3), elements=finite), st.integers(0, 5))
def test_flip_changes_row_by_delta(Z, i):
    spec = DesignSpec.interaction([0, 1])
    theta = np.zeros(6, dtype=int)
    G0, G1 = design_blocks(Z, spec)
    X0 = build_design(theta, Z, spec)
    theta[i] = 1
    X1 = build_design(theta, Z, spec)
    diff = X1 - X0
    assert np.array_equal(diff[i], G1[i] - G0[i])
    assert np.all(np.delete(diff, i, axis=0) == 0)


# ---------------------------------------------------------------- ols_fit


def test_interpolating_fit():
    fit = ols_fit(np.array([[1.0, 0.0], [0.0, 1.0]]), [3.0, 7.0])
    assert np.allclose(fit.beta_hat, [3.0, 7.0], atol=1e-14)
    assert np.allclose(fit.residuals, 0.0, atol=1e-14)


def test_noiseless_recovery(rng):
    z = rng.standard_normal(200)
    th = (rng.random(200) < 0.4).astype(int)
    X = build_design(th, z[:, None], SIM_SPEC)
    y = X @ np.array([10.0, 1.0, 1.0])
    assert np.allclose(ols_fit(X, y).beta_hat, [10.0, 1.0, 1.0], atol=1e-10)


def test_against_rational_normal_equations():
    X = np.array([[1, 0.5, 2], [1, -1.25, 0], [1, 3, 1.5], [1, 0.75, -2], [1, 2, 0.25]])
    y = np.array([1.5, -0.25, 4.0, 2.5, 0.125])
    want = exact_ols(X.tolist(), y.tolist())
    assert np.allclose(ols_fit(X, y).beta_hat, want, rtol=0, atol=1e-10)


def test_singular_design_names_columns(rng):
    x = rng.standard_normal(50)
    X = np.column_stack([np.ones(50), x, 2 * x])
    with pytest.raises(SingularDesignError) as info:
        ols_fit(X, rng.standard_normal(50))
    assert set(info.value.columns) & {1, 2}


def test_label_never_one_is_singular(rng):
    data = Dataset(rng.standard_normal(30), np.ones((30, 1)), np.zeros(30, dtype=int))
    with pytest.raises(SingularDesignError):
        fit_dataset(data, DesignSpec.additive())


def test_dataset_needs_k_plus_one_rows():
    data = Dataset([1.0, 2.0], np.ones((2, 1)), [0, 1])
    with pytest.raises(DesignError, match="n >= k\\+1"):
        fit_dataset(data, DesignSpec.additive())


def test_fit_quantities(sim_small):
    _, data, _ = sim_small
    fit = fit_dataset(data, SIM_SPEC)
    X = build_design(data.theta_hat, data.Z, SIM_SPEC)
    n = data.n
    assert np.allclose(fit.Q_hat, X.T @ X / n, rtol=1e-12, atol=0)
    assert np.allclose(fit.Q_hat_inv @ fit.Q_hat, np.eye(3), atol=1e-10)
    assert np.allclose(X.T @ fit.residuals, 0.0, atol=1e-8 * n)
    assert np.allclose(X @ fit.beta_hat + fit.residuals, data.y, atol=1e-12)
    u = fit.residuals
    assert np.allclose(fit.sigma_hat, (X * u[:, None] ** 2).T @ X / n, rtol=1e-12)
    assert fit.pi_hat == np.mean(data.theta_hat)
    assert np.all(np.linalg.eigvalsh(fit.Q_hat) > 0)


@given(st.permutations(list(range(12))))
def test_row_permutation_invariance(perm):
    rng = np.random.default_rng(3)
    X = np.column_stack([np.ones(12), rng.standard_normal((12, 2))])
    y = rng.standard_normal(12)
    a = ols_fit(X, y).beta_hat
    b = ols_fit(X[list(perm)], y[list(perm)]).beta_hat
    assert np.allclose(a, b, atol=1e-12)


# ---------------------------------------------------------------- bias matrices


def test_additive_constant_only():
    # g(1) = (1, 1)', g(0) = (0, 1)', difference (1, 0)'; the Z_i = 1 case of the
    # additive example's D+ = [[1, 0], [Z, 0]] and D- = [[0, 0], [-Z, 0]]
    bm = bias_matrices(np.ones((4, 1)), DesignSpec.additive(), per_obs=True)
    for i in range(4):
        assert np.array_equal(bm.D_plus[i], [[1.0, 0.0], [1.0, 0.0]])
        assert np.array_equal(bm.D_minus[i], [[0.0, 0.0], [-1.0, 0.0]])
    assert np.array_equal(bm.D_plus_bar, [[1.0, 0.0], [1.0, 0.0]])
    assert np.array_equal(bm.D_minus_bar, [[0.0, 0.0], [-1.0, 0.0]])


def test_brute_force_averages(rng):
    Z = rng.standard_normal((4, 3))
    spec = DesignSpec.interaction([0], base=[1, 2])
    bm = bias_matrices(Z, spec)
    G0, G1 = design_blocks(Z, spec)
    dp = sum(np.outer(G1[i], G1[i] - G0[i]) for i in range(4)) / 4
    dm = sum(np.outer(G0[i], G0[i] - G1[i]) for i in range(4)) / 4
    assert np.allclose(bm.D_plus_bar, dp, rtol=0, atol=1e-15)
    assert np.allclose(bm.D_minus_bar, dm, rtol=0, atol=1e-15)


def test_interaction_block_pattern(rng):
    """With kappas assembled, B has kappa+ E[Z1 Z1'] top left, (kappa+ - kappa-) E[Z2 Z1'] below, zero right."""
    n = 400
    Z = rng.standard_normal((n, 3))
    spec = DesignSpec.interaction([0], base=[1, 2])
    bm = bias_matrices(Z, spec)
    kp, km = 1.3, 0.4
    B = kp * bm.D_plus_bar + km * bm.D_minus_bar
    Z1, Z2 = Z[:, :1], Z[:, 1:]
    assert np.allclose(B[:1, :1], kp * Z1.T @ Z1 / n)
    assert np.allclose(B[1:, :1], (kp - km) * Z2.T @ Z1 / n)
    assert np.all(B[:, 1:] == 0)


@given(arrays(float, (5, 2), elements=finite))
def test_plus_minus_sum_is_psd_outer_product(Z):
    spec = DesignSpec.from_recipes(("0", 0, "1"), (1, 0, "1"))
    bm = bias_matrices(Z, spec, per_obs=True)
    G0, G1 = design_blocks(Z, spec)
    for i in range(5):
        d = G1[i] - G0[i]
        S = bm.D_plus[i] + bm.D_minus[i]
        assert np.allclose(S, np.outer(d, d), atol=1e-9 * (1 + np.abs(S).max()))
        assert np.linalg.eigvalsh(0.5 * (S + S.T)).min() >= -1e-8 * (1 + np.abs(S).max())
