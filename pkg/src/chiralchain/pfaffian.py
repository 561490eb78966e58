"""Pfaffians of real antisymmetric matrices.

The Pfaffian is computed by Householder tridiagonalization: the Hessenberg
form of an antisymmetric matrix is antisymmetric tridiagonal, A = Q T Q^T
with Q a product of Householder reflectors, and

    Pf(A) = det(Q) * T[0,1] * T[2,3] * T[4,5] * ...

det(Q) = +-1 comes from ``slogdet``.  Small sizes (n <= 4) use the closed
forms.  The congruence identity Pf(B A B^T) = det(B) Pf(A) and
Pf(A)^2 = det(A) are enforced in the test suite against independent
oracles.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = ["pfaffian4", "pfaffian"]


def _check_antisymmetric(A: np.ndarray, tol: float) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if np.iscomplexobj(A):
        if np.max(np.abs(A.imag)) > tol:
            raise ValueError("expected a real matrix")
        A = A.real
    A = np.asarray(A, dtype=float)
    dev = np.max(np.abs(A + A.T)) if A.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not antisymmetric (|A + A^T| max = {dev:.3e})")
    return A


def pfaffian4(A, tol: float = 1e-10) -> float:
    """Pfaffian of a 4x4 real antisymmetric matrix (closed form).

    Pf(A) = a01*a23 - a02*a13 + a03*a12.
    """
    A = _check_antisymmetric(A, tol)
    if A.shape != (4, 4):
        raise ValueError(f"pfaffian4 expects a 4x4 matrix, got {A.shape}")
    return float(A[0, 1] * A[2, 3] - A[0, 2] * A[1, 3] + A[0, 3] * A[1, 2])


def pfaffian(A, tol: float = 1e-10) -> float:
    """Pfaffian of an even-dimensional real antisymmetric matrix.

    Odd dimensions return 0.0, the empty matrix returns 1.0.  O(n^3) via
    LAPACK's Householder reduction to (tridiagonal) Hessenberg form.
    """
    A = _check_antisymmetric(A, tol)
    n = A.shape[0]
    if n == 0:
        return 1.0
    if n % 2 == 1:
        return 0.0
    if n == 2:
        return float(A[0, 1])
    if n == 4:
        return float(A[0, 1] * A[2, 3] - A[0, 2] * A[1, 3] + A[0, 3] * A[1, 2])
    T, Q = scipy.linalg.hessenberg(A, calc_q=True)
    # T = Q^T A Q is antisymmetric tridiagonal up to roundoff.
    sign, _ = np.linalg.slogdet(Q)
    super_diag = np.diagonal(T, offset=1)
    return float(sign) * float(np.prod(super_diag[0::2]))
