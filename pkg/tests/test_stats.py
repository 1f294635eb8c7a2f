import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ioinfra.errors import (
    CollinearDesignError,
    ConstantColumnError,
    DegenerateResponseWarning,
    InsufficientObservationsError,
    ShapeError,
)
from ioinfra.stats import correlation_matrix, ols_fit, r_squared, vif


def normal_equations(X, y):
    D = np.column_stack([np.ones(len(y)), X])
    beta = np.linalg.solve(D.T @ D, D.T @ y)
    return beta[0], beta[1:]


def aux_vif(X):
    out = []
    for j in range(X.shape[1]):
        others = np.delete(X, j, axis=1)
        _, b = normal_equations(others, X[:, j])
        a = X[:, j].mean() - others.mean(0) @ b
        resid = X[:, j] - a - others @ b
        r2 = 1 - resid @ resid / ((X[:, j] - X[:, j].mean()) ** 2).sum()
        out.append(1 / (1 - r2))
    return np.array(out)


def test_exact_line():
    res = ols_fit(np.array([0.0, 1, 2, 3])[:, None], [1.0, 3, 5, 7])
    assert res.intercept == pytest.approx(1.0, abs=1e-12)
    assert res.coefficients[0] == pytest.approx(2.0, abs=1e-12)
    assert res.r_squared == pytest.approx(1.0)


def test_orthogonal_response():
    x = np.array([-1.0, 0, 1, -1, 0, 1])
    y = np.array([1.0, -2, 1, 1, -2, 1])
    res = ols_fit(x[:, None], y)
    assert abs(res.coefficients[0]) < 1e-12
    assert res.r_squared < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_normal_equations_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(10, 3))
    y = rng.normal(size=10)
    res = ols_fit(X, y)
    a, b = normal_equations(X, y)
    np.testing.assert_allclose(res.coefficients, b, rtol=1e-8, atol=1e-10)
    assert res.intercept == pytest.approx(a, rel=1e-8, abs=1e-10)
    np.testing.assert_allclose(res.vifs, aux_vif(X), rtol=1e-8)
    # residuals orthogonal to the predictors and the constant
    D = np.column_stack([np.ones(10), X])
    assert np.max(np.abs(D.T @ res.residuals)) < 1e-6 * np.linalg.norm(y)


def test_without_intercept():
    X = np.array([[1.0], [2.0], [3.0]])
    res = ols_fit(X, [2.0, 4.0, 6.0], with_intercept=False)
    assert res.intercept == 0.0
    assert res.coefficients[0] == pytest.approx(2.0)


def test_collinear_design_names_column():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(12, 3))
    X[:, 2] = X[:, 0] - 2 * X[:, 1]
    with pytest.raises(CollinearDesignError) as info:
        ols_fit(X, rng.normal(size=12), names=["a", "b", "c"])
    assert info.value.column == "c"
    res = ols_fit(X, rng.normal(size=12), strict=False)
    assert res.rank_deficient and np.isinf(res.vifs).all()


def test_insufficient_observations():
    with pytest.raises(InsufficientObservationsError):
        ols_fit(np.ones((3, 2)), np.ones(3))
    with pytest.raises(ShapeError):
        ols_fit(np.ones((5, 2)), np.ones(4))


def test_zero_variance_response_warns():
    with pytest.warns(DegenerateResponseWarning):
        assert r_squared(np.ones(4), np.ones(4)) == 0.0


def test_vif_orthogonal_columns():
    X = np.array([[1.0, 1], [1, -1], [-1, 1], [-1, -1]])
    np.testing.assert_allclose(vif(X), [1.0, 1.0])


def test_vif_correlation_point_nine(rng):
    a = rng.normal(size=200)
    b = rng.normal(size=200)
    # make b exactly orthogonal to a (after centering), then mix
    a -= a.mean(); b -= b.mean()
    b -= (a @ b) / (a @ a) * a
    a /= np.linalg.norm(a); b /= np.linalg.norm(b)
    X = np.column_stack([a, 0.9 * a + np.sqrt(1 - 0.81) * b])
    assert np.corrcoef(X.T)[0, 1] == pytest.approx(0.9, abs=1e-12)
    np.testing.assert_allclose(vif(X), 1 / (1 - 0.81), atol=1e-9)
    np.testing.assert_allclose(vif(X), 5.263, atol=1e-3)


def test_vif_duplicate_column_is_infinite(rng):
    x = rng.normal(size=20)
    X = np.column_stack([x, x, rng.normal(size=20)])
    v = vif(X)
    assert np.isinf(v[0]) and np.isinf(v[1]) and np.isfinite(v[2])


def test_vif_needs_two_columns():
    with pytest.raises(ShapeError):
        vif(np.ones((5, 1)))


def test_correlation_matrix_cases(rng):
    x = rng.normal(size=30)
    R = correlation_matrix(np.column_stack([x, x]))
    assert R[0, 1] == pytest.approx(1.0)
    np.testing.assert_array_equal(correlation_matrix(x[:, None]), [[1.0]])
    big = np.random.default_rng(7).normal(size=(10000, 5))
    R = correlation_matrix(big)
    off = R[~np.eye(5, dtype=bool)]
    assert np.all(np.abs(off) < 0.05)
    assert np.allclose(R, R.T) and np.all(np.diag(R) == 1)
    assert np.linalg.eigvalsh(R).min() > -1e-10
    np.testing.assert_allclose(R, np.corrcoef(big.T), atol=1e-12)


def test_constant_column_named():
    X = np.column_stack([np.arange(5.0), np.ones(5)])
    with pytest.raises(ConstantColumnError) as info:
        correlation_matrix(X, names=["a", "flat"])
    assert info.value.column == "flat"


@pytest.mark.parametrize("seed", range(5))
def test_nested_models_r_squared(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 5))
    y = X @ rng.normal(size=5) + rng.normal(size=30)
    r2 = [ols_fit(X[:, :k], y).r_squared for k in range(1, 6)]
    assert all(b >= a - 1e-12 for a, b in zip(r2, r2[1:]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3), st.integers(0, 3))
def test_vif_scale_invariance(seed, scale, col):
    X = np.random.default_rng(seed).normal(size=(25, 4))
    X[:, 1] += 0.5 * X[:, 0]
    Y = X.copy()
    Y[:, col] *= scale
    np.testing.assert_allclose(vif(Y), vif(X), rtol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_affine_reparameterization(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(20, 3))
    y = rng.normal(size=20)
    T = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    shift = rng.normal(size=3)
    a = ols_fit(X, y)
    b = ols_fit(X @ T + shift, y)
    np.testing.assert_allclose(y - b.residuals, y - a.residuals, atol=1e-8)


def test_to_dict_marks_infinite_vifs(rng):
    x = rng.normal(size=10)
    res = ols_fit(np.column_stack([x, 2 * x]), rng.normal(size=10), strict=False)
    d = res.to_dict()
    assert d["vifs"] == ["inf", "inf"] and d["multicollinear"]
