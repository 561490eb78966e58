"""Brute-force reference implementations used only by the test suite.

Everything here trades efficiency for obviousness: dense Fock-space
matrices built from Kronecker products, recursive Pfaffian expansion,
explicit Jordan-Wigner strings.  Package code must agree with these on
small systems.
"""

from __future__ import annotations

import numpy as np

# single fermion-mode / spin-1/2 matrices
_ANNIHILATE = np.array([[0.0, 1.0], [0.0, 0.0]])  # basis (|0>, |1>)
_NUMBER = np.array([[0.0, 0.0], [0.0, 1.0]])
_PARITY = np.array([[1.0, 0.0], [0.0, -1.0]])     # 1 - 2n
_ID = np.eye(2)

# Pauli matrices in the occupation-ordered basis (index 0 = down/empty,
# index 1 = up/occupied) so that sigma^+ equals the fermion creator times
# its string at matrix level and cross-engine checks need no relabeling.
_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SY = np.array([[0.0, 1.0j], [-1.0j, 0.0]])
_SZ = np.array([[-1.0, 0.0], [0.0, 1.0]])


def kron_chain(ops: dict[int, np.ndarray], n_factors: int) -> np.ndarray:
    """Kronecker product over n_factors slots, identity where ops has no entry."""
    out = np.array([[1.0 + 0.0j]])
    for p in range(n_factors):
        out = np.kron(out, ops.get(p, _ID))
    return out


def jw_annihilator(pos: int, n_modes: int) -> np.ndarray:
    """Fermion annihilator at Jordan-Wigner position pos (string of parities before it)."""
    ops = {p: _PARITY for p in range(pos)}
    ops[pos] = _ANNIHILATE
    return kron_chain(ops, n_modes)


def fock_hamiltonian(A: np.ndarray, B: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Dense many-body H = sum A_ij f_i^dag f_j + (1/2) sum (B_ij f_i^dag f_j^dag + h.c.).

    order[i] = Jordan-Wigner position of mode i; modes are whatever
    indexing A and B use.
    """
    n = A.shape[0]
    n_modes = len(order)
    a = [jw_annihilator(int(order[i]), n_modes) for i in range(n)]
    H = np.zeros((2 ** n_modes, 2 ** n_modes), dtype=complex)
    for i in range(n):
        for j in range(n):
            if A[i, j] != 0.0:
                H += A[i, j] * (a[i].conj().T @ a[j])
            if B[i, j] != 0.0:
                H += 0.5 * B[i, j] * (a[i].conj().T @ a[j].conj().T)
                H += 0.5 * np.conj(B[i, j]) * (a[j] @ a[i])
    return H


def ground_state(H: np.ndarray) -> tuple[float, np.ndarray]:
    evals, evecs = np.linalg.eigh(H)
    return float(evals[0]), evecs[:, 0]


def sector_ground_state(H: np.ndarray, n_modes: int, parity: int) -> tuple[float, np.ndarray]:
    """Lowest state of fixed fermion parity (+1 even, -1 odd)."""
    dim = H.shape[0]
    pops = np.array([bin(i).count("1") for i in range(dim)])
    mask = (pops % 2 == 0) if parity == 1 else (pops % 2 == 1)
    idx = np.where(mask)[0]
    sub = H[np.ix_(idx, idx)]
    evals, evecs = np.linalg.eigh(sub)
    vec = np.zeros(dim, dtype=complex)
    vec[idx] = evecs[:, 0]
    return float(evals[0]), vec


def expectation(psi: np.ndarray, op: np.ndarray) -> complex:
    return complex(np.vdot(psi, op @ psi))


def covariance_matrices(psi: np.ndarray, annihilators: list[np.ndarray]):
    """C_ij = <f_i^dag f_j>, F_ij = <f_i f_j> in the given state."""
    n = len(annihilators)
    C = np.zeros((n, n), dtype=complex)
    F = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            C[i, j] = expectation(psi, annihilators[i].conj().T @ annihilators[j])
            F[i, j] = expectation(psi, annihilators[i] @ annihilators[j])
    return C, F


def schmidt_spectrum(psi: np.ndarray, n_left_factors: int, n_modes: int) -> np.ndarray:
    """Descending squared Schmidt coefficients for the leftmost factors."""
    mat = psi.reshape(2 ** n_left_factors, 2 ** (n_modes - n_left_factors))
    s = np.linalg.svd(mat, compute_uv=False)
    return np.sort(s ** 2)[::-1]


def pfaffian_recursive(A: np.ndarray) -> float:
    """Pfaffian by cofactor expansion along the first row; O(n!!), tests only."""
    n = A.shape[0]
    if n % 2:
        return 0.0
    if n == 0:
        return 1.0
    if n == 2:
        return float(A[0, 1])
    total = 0.0
    rest = list(range(1, n))
    for pos, j in enumerate(rest):
        keep = [k for k in rest if k != j]
        minor = A[np.ix_(keep, keep)]
        total += (-1.0) ** pos * A[0, j] * pfaffian_recursive(minor)
    return total


# ---------------------------------------------------------------------------
# spin-model operators: rung n has an A spin and a B spin; the Jordan-Wigner
# (and Fock factor) order within a rung puts B before A, matching the package

def spin_positions(N: int) -> tuple[list[int], list[int]]:
    """(B positions, A positions) in the 2N-factor chain."""
    return [2 * n for n in range(N)], [2 * n + 1 for n in range(N)]


def pauli(axis: str, pos: int, n_factors: int) -> np.ndarray:
    mat = {"x": _SX, "y": _SY, "z": _SZ}[axis]
    return kron_chain({pos: mat}, n_factors)


def spin_hamiltonian(omega0: float, Omega0: float, J: float, g: float, phi: float,
                     N: int) -> np.ndarray:
    """Two coupled chains: A spins split by omega0, B an XY chain, chiral coupling.

    Chain A uses Pauli operators sigma (splitting omega0/2 sigma^z), chain B
    spin-1/2 operators S = sigma/2; the interchain term is
    2g sum_n [sigma_n^+ (e^{i phi} S^x_{n+1} + e^{-i phi} S^x_n) + h.c.].
    """
    posB, posA = spin_positions(N)
    nf = 2 * N
    dim = 2 ** nf
    H = np.zeros((dim, dim), dtype=complex)
    for n in range(N):
        H += 0.5 * omega0 * pauli("z", posA[n], nf)
        H += 0.5 * Omega0 * pauli("z", posB[n], nf)
    for n in range(N - 1):
        sp_n = 0.5 * (pauli("x", posB[n], nf) + 1j * pauli("y", posB[n], nf))
        sm_n1 = 0.5 * (pauli("x", posB[n + 1], nf) - 1j * pauli("y", posB[n + 1], nf))
        H += J * (sp_n @ sm_n1 + sm_n1.conj().T @ sp_n.conj().T)
    for n in range(N - 1):
        sigp = 0.5 * (pauli("x", posA[n], nf) + 1j * pauli("y", posA[n], nf))
        sxB_next = 0.5 * pauli("x", posB[n + 1], nf)
        sxB_here = 0.5 * pauli("x", posB[n], nf)
        term = 2.0 * g * sigp @ (np.exp(1j * phi) * sxB_next + np.exp(-1j * phi) * sxB_here)
        H += term + term.conj().T
    return H


def spin_parity(N: int) -> np.ndarray:
    nf = 2 * N
    P = np.eye(2 ** nf, dtype=complex)
    for p in range(nf):
        P = P @ pauli("z", p, nf)
    return P


def spin_operator(axis: str, chain: str, n: int, N: int) -> np.ndarray:
    """Spin-1/2 component S^axis on the given chain and rung (A ops are sigma/2)."""
    posB, posA = spin_positions(N)
    pos = posA[n] if chain == "A" else posB[n]
    return 0.5 * pauli(axis, pos, 2 * N)
