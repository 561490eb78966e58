"""Pfaffian routines against the recursive cofactor definition."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiralchain.pfaffian import pfaffian, pfaffian4

from .oracles import pfaffian_recursive


def _random_antisymmetric(n, rng):
    M = rng.normal(size=(n, n))
    return M - M.T


def test_empty_and_odd():
    assert pfaffian(np.zeros((0, 0))) == 1.0
    assert pfaffian(np.zeros((3, 3))) == 0.0
    assert pfaffian(np.zeros((5, 5))) == 0.0


def test_two_by_two():
    A = np.array([[0.0, 3.5], [-3.5, 0.0]])
    assert pfaffian(A) == pytest.approx(3.5)


def test_pfaffian4_closed_form(rng):
    for _ in range(20):
        A = _random_antisymmetric(4, rng)
        expected = (
            A[0, 1] * A[2, 3] - A[0, 2] * A[1, 3] + A[0, 3] * A[1, 2]
        )
        assert pfaffian4(A) == pytest.approx(expected, rel=1e-12, abs=1e-12)
        assert pfaffian(A) == pytest.approx(expected, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_matches_recursive_definition(n, rng):
    for _ in range(5):
        A = _random_antisymmetric(n, rng)
        assert pfaffian(A) == pytest.approx(
            pfaffian_recursive(A), rel=1e-9, abs=1e-9
        )


@given(seed=st.integers(min_value=0, max_value=10**6), half=st.integers(min_value=1, max_value=6))
def test_pfaffian_squared_is_determinant(seed, half):
    rng = np.random.default_rng(seed)
    A = _random_antisymmetric(2 * half, rng)
    pf = pfaffian(A)
    assert pf * pf == pytest.approx(np.linalg.det(A), rel=1e-8, abs=1e-8)


def test_sign_convention_block_diagonal():
    # direct sum of 2x2 blocks [[0, a], [-a, 0]]: Pf = prod(a_i)
    a = np.array([1.5, -2.0, 0.5])
    A = np.zeros((6, 6))
    for i, ai in enumerate(a):
        A[2 * i, 2 * i + 1] = ai
        A[2 * i + 1, 2 * i] = -ai
    assert pfaffian(A) == pytest.approx(np.prod(a), rel=1e-12)


def test_congruence_transformation(rng):
    # Pf(B A B^T) = det(B) Pf(A)
    A = _random_antisymmetric(6, rng)
    B = rng.normal(size=(6, 6))
    lhs = pfaffian(B @ A @ B.T)
    rhs = np.linalg.det(B) * pfaffian(A)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        pfaffian(np.eye(4))
    with pytest.raises(ValueError):
        pfaffian(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        pfaffian4(np.zeros((6, 6)))


def test_singular_matrix():
    A = np.zeros((4, 4))
    A[0, 1] = 1.0
    A[1, 0] = -1.0
    assert pfaffian(A) == pytest.approx(0.0, abs=1e-12)
