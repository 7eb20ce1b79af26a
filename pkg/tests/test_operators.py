import numpy as np
import pytest

from src.errors import SingularSystemError
from src.models import BoundaryKind, ModelParams, SchemeParams
from src.numerics.grid import build_uniform
from src.numerics.operators import (
    TridiagonalMatrix,
    apply_D1,
    apply_D1_squared,
    apply_D2,
    assemble_lhs,
    solve_tridiagonal,
)


def _dominant_system(rng, n, periodic=False):
    lower = rng.uniform(-1.0, 1.0, n)
    upper = rng.uniform(-1.0, 1.0, n)
    diag = (np.abs(lower) + np.abs(upper) + rng.uniform(0.5, 2.0, n)) * rng.choice([-1.0, 1.0], n)
    return TridiagonalMatrix(lower, diag, upper, periodic=periodic)


def test_central_differences_with_zero_ghosts():
    v = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(apply_D1(v), [2.0, 2.0, -2.0])
    np.testing.assert_array_equal(apply_D2(v), [0.0, 0.0, -4.0])


def test_central_differences_periodic():
    v = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(apply_D1(v, BoundaryKind.PERIODIC), [-1.0, 2.0, -1.0])
    np.testing.assert_array_equal(apply_D2(v, BoundaryKind.PERIODIC), [3.0, 0.0, -3.0])


def test_iterated_difference_equals_d1_twice_when_periodic():
    v = np.random.default_rng(3).standard_normal(12)
    twice = apply_D1(apply_D1(v, BoundaryKind.PERIODIC), BoundaryKind.PERIODIC)
    np.testing.assert_allclose(apply_D1_squared(v, BoundaryKind.PERIODIC), twice, atol=1e-14)


def test_operators_act_column_wise_on_batches():
    v = np.random.default_rng(4).standard_normal((9, 3))
    for m in range(3):
        np.testing.assert_array_equal(apply_D2(v)[:, m], apply_D2(v[:, m]))
        np.testing.assert_array_equal(apply_D1_squared(v)[:, m], apply_D1_squared(v[:, m]))


def test_thomas_matches_dense_elimination():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(3, 201))
        m = _dominant_system(rng, n)
        rhs = rng.uniform(-1.0, 1.0, n)
        expected = np.linalg.solve(m.to_dense(), rhs)
        np.testing.assert_allclose(solve_tridiagonal(m, rhs), expected, rtol=0.0,
                                   atol=1e-12 * (1.0 + np.max(np.abs(rhs))))


def test_cyclic_solve_matches_dense_elimination():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(3, 201))
        m = _dominant_system(rng, n, periodic=True)
        rhs = rng.uniform(-1.0, 1.0, (n, 2))
        expected = np.linalg.solve(m.to_dense(), rhs)
        np.testing.assert_allclose(solve_tridiagonal(m, rhs), expected, rtol=0.0, atol=1e-12)


def test_matvec_matches_dense_product():
    rng = np.random.default_rng(11)
    for periodic in (False, True):
        m = _dominant_system(rng, 8, periodic=periodic)
        x = rng.standard_normal(8)
        np.testing.assert_allclose(m.matvec(x), m.to_dense() @ x, atol=1e-14)


def test_solve_reuses_factorisation():
    m = _dominant_system(np.random.default_rng(5), 10)
    solve_tridiagonal(m, np.ones(10))
    factors = m._factors
    solve_tridiagonal(m, np.zeros(10))
    assert m._factors is factors


def test_zero_pivot_is_singular():
    m = TridiagonalMatrix(np.ones(4), np.zeros(4), np.ones(4))
    with pytest.raises(SingularSystemError):
        solve_tridiagonal(m, np.ones(4))


def test_explicit_scheme_has_identity_lhs():
    grid = build_uniform(0.0, 16.0, 10)
    lhs = assemble_lhs(grid, SchemeParams(theta=0.0, sigma=0.0), 0.25, ModelParams(x_lo=0.0))
    np.testing.assert_array_equal(lhs.to_dense(), np.eye(9))


def test_lhs_coefficients():
    params = ModelParams(x_lo=0.0, mu=0.5, rho=0.2)
    grid = build_uniform(0.0, 16.0, 16)
    k = 0.25
    lhs = assemble_lhs(grid, SchemeParams(theta=0.5, sigma=-1.0), k, params)
    c1 = -0.5 * (-0.5) * k / 2.0
    c2 = (-1.0 * 0.2 - 0.5) * k / 2.0
    assert lhs.size == 15
    np.testing.assert_allclose(lhs.diag, 1.0 - 2.0 * c2)
    np.testing.assert_allclose(lhs.lower[1:], c2 - c1)
    np.testing.assert_allclose(lhs.upper[:-1], c2 + c1)
