import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import random_panel
from teamscope.econometrics import (
    RegressionError, bootstrap_binned_curve, ols, pearson, within_fixed_effects,
)


def test_ols_matches_normal_equations():
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(60), rng.normal(size=(60, 3))])
    y = X @ [1.0, 2.0, -1.0, 0.5] + rng.normal(size=60)
    res = ols(y, X)
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    resid = y - X @ beta
    se = np.sqrt(np.diag(np.linalg.inv(X.T @ X)) * (resid @ resid) / (60 - 4))
    np.testing.assert_allclose(res.params, beta, rtol=0, atol=1e-10)
    np.testing.assert_allclose(res.bse, se, rtol=1e-10)
    assert res.df_resid == 56 and res.nobs == 60


def test_ols_exact_fit_and_intercept_option():
    x = np.arange(10.0)
    res = ols(3 + 2 * x, x, ["x"], add_intercept=True)
    assert res.names == ["const", "x"]
    assert res.coef("const") == pytest.approx(3.0) and res.coef("x") == pytest.approx(2.0)
    assert res.rsquared == pytest.approx(1.0)


def test_rank_deficiency_names_columns():
    x = np.arange(10.0)
    X = np.column_stack([np.ones(10), x, 2 * x])
    with pytest.raises(RegressionError, match="twice"):
        ols(x, X, ["const", "x", "twice"])
    with pytest.raises(RegressionError):
        ols(np.ones(2), np.ones((2, 2)))


def test_scaling_a_regressor_scales_its_coefficient():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(40), rng.normal(size=40)])
    y = rng.normal(size=40)
    a, b = ols(y, X), ols(y, X * [1, 10])
    assert b.params[1] == pytest.approx(a.params[1] / 10)
    assert b.tvalues[1] == pytest.approx(a.tvalues[1])


def _dummy_ols(y, X, ids):
    _, g = np.unique(ids, return_inverse=True, return_counts=False)
    counts = np.bincount(g)
    keep = counts[g] >= 2
    y, X, g = y[keep], X[keep], g[keep]
    _, g = np.unique(g, return_inverse=True)
    D = np.eye(g.max() + 1)[g]
    return ols(y, np.column_stack([X, D]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_within_equals_dummy_variable_ols(seed):
    y, X, ids = random_panel(np.random.default_rng(seed))
    try:
        ref = _dummy_ols(y, X, ids)
    except RegressionError:
        with pytest.raises(RegressionError):
            within_fixed_effects(y, X, ids)
        return
    fe = within_fixed_effects(y, X, ids)
    k = X.shape[1]
    np.testing.assert_allclose(fe.params, ref.params[:k], rtol=0, atol=1e-8)
    np.testing.assert_allclose(fe.bse, ref.bse[:k], rtol=1e-8)
    assert fe.df_resid == ref.df_resid


def test_within_counts_singletons_and_refuses_degenerate():
    y = np.array([1.0, 2.0, 3.0, 5.0, 7.0])
    X = np.array([[0.0], [1.0], [2.0], [1.0], [9.0]])
    res = within_fixed_effects(y, X, ["a", "a", "a", "b", "c"], ["x"])
    assert res.singletons == 2 and res.entities == 1 and res.nobs == 3
    assert res.coef("x") == pytest.approx(1.0)
    with pytest.raises(RegressionError, match="two or more"):
        within_fixed_effects(y[:2], X[:2], ["a", "b"])
    with pytest.raises(RegressionError, match="within"):
        within_fixed_effects(y[:4], np.array([[1.0], [1.0], [2.0], [2.0]]), ["a", "a", "b", "b"], ["flat"])


def test_clustered_errors_reported():
    y, X, ids = random_panel(np.random.default_rng(4))
    res = within_fixed_effects(y, X, ids, cluster=ids)
    assert res.cov_type == "clustered" and np.all(np.isfinite(res.bse))


@settings(max_examples=40)
@given(st.integers(0, 100_000), st.floats(0.1, 100), st.floats(-50, 50))
def test_pearson_affine_invariance(seed, a, b):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=30), rng.normal(size=30)
    r = pearson(x, y)
    assert pearson(a * x + b, y) == pytest.approx(r, abs=1e-9)
    assert pearson(-a * x + b, y) == pytest.approx(-r, abs=1e-9)
    assert -1 <= r <= 1


def test_pearson_degenerate():
    assert math.isnan(pearson([1, 1, 1], [1, 2, 3]))
    assert math.isnan(pearson([1], [2]))
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)


def test_binned_curve_bins_and_determinism():
    rng = np.random.default_rng(0)
    x = rng.random(500)
    y = x + rng.normal(scale=0.1, size=500)
    a = bootstrap_binned_curve(x, y, n_bins=5, n_boot=200, seed=3)
    b = bootstrap_binned_curve(x, y, n_bins=5, n_boot=200, seed=3)
    assert a == b
    assert [c.bin for c in a] == [0, 1, 2, 3, 4]
    assert sum(c.n for c in a) == 500
    for c in a:
        assert c.ci_low <= c.mean_y <= c.ci_high
        assert c.lo <= c.mean_x <= c.hi


def test_binned_curve_includes_right_edge_and_skips_empty_bins():
    bins = bootstrap_binned_curve([0.05, 1.0, 1.0, float("nan")], [1.0, 2.0, 4.0, 9.0],
                                  n_bins=10, n_boot=50)
    assert [(c.bin, c.n, c.mean_y) for c in bins] == [(0, 1, 1.0), (9, 2, 3.0)]
