import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ioinfra.core import IOTable
from ioinfra.errors import DegenerateSectorError, ShapeError, SingularEconomyError
from ioinfra.leontief import (
    LeontiefModel,
    certify_productive,
    leontief_inverse,
    output_multipliers,
    propagate_demand_shock,
    technical_coefficients,
)

A2 = np.array([[0.1, 0.2], [0.3, 0.4]])


def neumann(A, terms=200):
    out = np.eye(A.shape[0])
    P = np.eye(A.shape[0])
    for _ in range(terms):
        P = P @ A
        out += P
    return out


def random_productive(rng, n, colsum=0.9, density=0.8):
    A = rng.random((n, n)) * (rng.random((n, n)) < density)
    s = A.sum(axis=0)
    s[s == 0] = 1.0
    return A / s * rng.uniform(0.0, colsum, n)


def table(flows, x):
    flows = np.asarray(flows, float)
    n = flows.shape[0]
    return IOTable(2000, "R", [f"s{i}" for i in range(n)], flows, np.zeros(n), np.zeros(n), x)


def test_technical_coefficients():
    A = technical_coefficients(table([[10, 20], [30, 40]], [100, 200]))
    np.testing.assert_array_equal(A, [[0.1, 0.1], [0.3, 0.2]])
    assert not technical_coefficients(table(np.zeros((3, 3)), [1, 0, 2])).any()


def test_technical_coefficients_elementwise_oracle(rng):
    Z = rng.uniform(0, 50, (5, 5))
    x = rng.uniform(100, 200, 5)
    A = technical_coefficients(table(Z, x))
    for i in range(5):
        for j in range(5):
            assert A[i, j] == Z[i, j] / x[j]


def test_degenerate_sector():
    with pytest.raises(DegenerateSectorError, match="s1"):
        technical_coefficients(table([[1, 1], [0, 0]], [10, 0]))


def test_trivial_inverses():
    np.testing.assert_array_equal(leontief_inverse(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(leontief_inverse([[0.5]]), [[2.0]])


def test_two_by_two_fixture():
    L = leontief_inverse(A2)
    det = (1 - 0.1) * (1 - 0.4) - 0.2 * 0.3
    closed = np.array([[0.6, 0.2], [0.3, 0.9]]) / det
    np.testing.assert_allclose(L, closed, atol=1e-6)
    np.testing.assert_allclose(L, neumann(A2), atol=1e-6)
    np.testing.assert_allclose(L, [[1.25, 0.4167], [0.625, 1.875]], atol=5e-5)
    np.testing.assert_allclose(output_multipliers(L), [1.875, 2.2917], atol=5e-5)
    np.testing.assert_allclose(output_multipliers(L), L.sum(axis=0))


def test_shock_fixture():
    L = leontief_inverse(A2)
    total, direct, indirect = propagate_demand_shock(L, [1, 0])
    np.testing.assert_allclose(total, [1.25, 0.625], atol=1e-12)
    np.testing.assert_array_equal(direct, [1, 0])
    np.testing.assert_allclose(indirect, [0.25, 0.625], atol=1e-12)
    np.testing.assert_allclose(direct + indirect, total, rtol=0, atol=1e-15)


def test_shock_trivial_cases(rng):
    L = leontief_inverse(A2)
    for part in propagate_demand_shock(L, np.zeros(2)):
        assert not part.any()
    f = rng.normal(size=3)
    total, direct, indirect = propagate_demand_shock(np.eye(3), f)
    np.testing.assert_array_equal(total, f)
    assert not indirect.any()


def test_shape_errors():
    with pytest.raises(ShapeError):
        propagate_demand_shock(np.eye(2), [1, 2, 3])
    with pytest.raises(ShapeError):
        leontief_inverse(np.ones((2, 3)) * 0.1)


@pytest.mark.parametrize("A", [[[1.0]], [[0.5, 0.5], [0.5, 0.5]], [[0.0, 2.0], [0.5, 0.0]]])
def test_non_productive(A):
    with pytest.raises(SingularEconomyError):
        leontief_inverse(A)


def test_column_sums_above_one_can_still_be_productive():
    A = np.array([[0.0, 1.2], [0.1, 0.0]])  # spectral radius sqrt(0.12)
    bound = certify_productive(A)
    assert np.sqrt(0.12) - 1e-9 <= bound < 1
    L = leontief_inverse(A)
    np.testing.assert_allclose((np.eye(2) - A) @ L, np.eye(2), atol=1e-12)


def test_multipliers_permute_with_sectors(rng):
    A = random_productive(rng, 5)
    P = rng.permutation(5)
    m = output_multipliers(leontief_inverse(A))
    mp = output_multipliers(leontief_inverse(A[np.ix_(P, P)]))
    np.testing.assert_allclose(mp, m[P], rtol=1e-12)
    assert np.all(m >= 1)


@pytest.mark.parametrize("seed", range(10))
def test_neumann_equivalence(seed):
    rng = np.random.default_rng(seed)
    A = random_productive(rng, int(rng.integers(1, 9)))
    L = leontief_inverse(A)
    np.testing.assert_allclose(L, neumann(A), atol=1e-6)
    np.testing.assert_allclose((np.eye(len(A)) - A) @ L, np.eye(len(A)), atol=1e-8)
    assert np.all(L >= np.eye(len(A)) - 1e-12)


def test_additivity(rng):
    L = leontief_inverse(random_productive(rng, 6))
    f1, f2 = rng.normal(size=6), rng.normal(size=6)
    t12 = propagate_demand_shock(L, f1 + f2)[0]
    np.testing.assert_allclose(t12, propagate_demand_shock(L, f1)[0] + propagate_demand_shock(L, f2)[0],
                               atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.05))
def test_monotonicity(seed, bump):
    rng = np.random.default_rng(seed)
    A = random_productive(rng, 5, colsum=0.85)
    B = A + bump * rng.random((5, 5)) / 5
    assert np.all(leontief_inverse(B) >= leontief_inverse(A) - 1e-12)


def test_model_from_table():
    t = table([[10, 20], [30, 40]], [100, 200])
    model = LeontiefModel.from_table(t)
    assert 0 <= model.spectral_radius_bound < 1
    np.testing.assert_allclose(model.multipliers(), model.inverse.sum(0))
    total, _, _ = model.propagate([1, 0])
    np.testing.assert_allclose(total, model.inverse[:, 0])
