"""Pfaffian Z2 invariant, real-space BdG spectra, zero modes, and edge LDOS.

Bloch blocks map to the Majorana basis through the 2x2-block matrix
W = [[I, I], [iI, -iI]] (and its inverse); at the self-conjugate momenta
k = 0 and pi the matrices i*Htilde_k are real antisymmetric and the signs
of their Pfaffians define the Z2 index

    Q = sgn( Pf[i Htilde_0] * Pf[i Htilde_pi] ),

+1 in the trivial phase and -1 in the topological one.  Open-chain
physics (edge-localized zero modes, local density of states) comes from
the 4N x 4N real-space BdG matrix with flavor-major ordering
(b_0..b_{N-1}, c_0..c_{N-1}, b_0^dag.., c_0^dag..).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .params import ModelParams
from .pfaffian import pfaffian, pfaffian4

__all__ = [
    "MajoranaBloch",
    "RealSpaceBdG",
    "ZeroModes",
    "W_MAJORANA",
    "W_MAJORANA_INV",
    "majorana_bloch",
    "z2_invariant",
    "invariant_map",
    "build_realspace",
    "realspace_spectrum",
    "majorana_realspace",
    "zero_modes",
    "ldos",
    "ldos_curve",
    "pfaffian4",
]

#: Nambu -> Majorana basis change, gamma = W (b, c, b^dag, c^dag)^T, so that
#: gamma_1 = f + f^dag and gamma_2 = i(f - f^dag) for each flavor.
W_MAJORANA = np.block([
    [np.eye(2), np.eye(2)],
    [1j * np.eye(2), -1j * np.eye(2)],
])

W_MAJORANA_INV = np.linalg.inv(W_MAJORANA)  # = W^dag / 2


@dataclass(frozen=True)
class MajoranaBloch:
    k: float
    entries: np.ndarray  # 4x4, W H_k W^{-1}


@dataclass(frozen=True)
class RealSpaceBdG:
    N: int
    matrix: np.ndarray  # 4N x 4N Hermitian, flavor-major (b, c, b^dag, c^dag)
    constant: float     # additive Tr(A)/2 from normal ordering


@dataclass(frozen=True)
class ZeroModes:
    E_min: float
    edge_weight: float  # weight of the E_min eigenvector on the outer 10% per side


def majorana_bloch(p: ModelParams, k: float) -> MajoranaBloch:
    """Bloch block rotated to the Majorana basis, Htilde_k = W H_k W^{-1}."""
    from .bloch import bloch_batch

    H = bloch_batch(p, [k])[0]
    return MajoranaBloch(k=float(k), entries=W_MAJORANA @ H @ W_MAJORANA_INV)


def _real_antisymmetric(M: np.ndarray, tol: float) -> np.ndarray:
    """Real antisymmetric part of M; raises if M deviates beyond tol."""
    A = 0.5 * (M.real - M.real.T)
    dev = max(np.max(np.abs(M.imag)), np.max(np.abs(M.real + M.real.T)) / 2.0)
    if dev > tol:
        raise ValueError(
            f"matrix is not real antisymmetric to {tol:.1e} (deviation {dev:.3e}); "
            "Majorana basis change is broken")
    return A


def z2_invariant(p: ModelParams, tol: float = 1e-10) -> int:
    """Kitaev Z2 index from Pfaffian signs at k = 0 and pi: +1 trivial, -1 topological."""
    prod = 1.0
    for k in (0.0, math.pi):
        Ht = majorana_bloch(p, k).entries
        A = _real_antisymmetric(1j * Ht, tol)
        prod *= pfaffian4(A)
    if prod == 0.0:
        raise ValueError("Pfaffian vanishes at k = 0 or pi: gap closed, invariant undefined")
    return 1 if prod > 0.0 else -1


def invariant_map(p: ModelParams, g_values: Sequence[float],
                  phi_values: Sequence[float]) -> np.ndarray:
    """Q on a (phi, g) grid, shape (len(phi_values), len(g_values))."""
    out = np.empty((len(phi_values), len(g_values)), dtype=int)
    for i, phi in enumerate(phi_values):
        for j, g in enumerate(g_values):
            out[i, j] = z2_invariant(dataclasses.replace(p, g=float(g), phi=float(phi)))
    return out


def build_realspace(p: ModelParams) -> RealSpaceBdG:
    """Open-chain single-particle BdG matrix (quartic term dropped).

    H = (1/2) Psi^dag M Psi + Tr(A)/2 with Psi the flavor-major Nambu
    vector and M = [[A, B], [-conj(B), -conj(A)]]; B is antisymmetric.
    """
    if p.boundary != "open":
        raise ValueError(f"real-space builder requires open boundary, got {p.boundary!r}")
    N = p.N
    A = np.zeros((2 * N, 2 * N), dtype=complex)
    B = np.zeros((2 * N, 2 * N), dtype=complex)

    def b(n: int) -> int:
        return n

    def c(n: int) -> int:
        return N + n

    for n in range(N):
        A[b(n), b(n)] = p.Omega0
        A[c(n), c(n)] = p.omega0
    for n in range(N - 1):
        A[b(n), b(n + 1)] += p.J
        A[b(n + 1), b(n)] += p.J

    fwd = p.g * np.exp(1j * p.phi)   # c_n^dag b_{n+1} and c_n^dag b_{n+1}^dag
    bwd = p.g * np.exp(-1j * p.phi)  # c_n^dag b_n minus c_n^dag b_n^dag
    for n in range(N - 1):
        A[c(n), b(n + 1)] += fwd
        A[b(n + 1), c(n)] += np.conj(fwd)
        A[c(n), b(n)] += bwd
        A[b(n), c(n)] += np.conj(bwd)

        B[c(n), b(n + 1)] += fwd
        B[b(n + 1), c(n)] -= fwd
        B[c(n), b(n)] -= bwd
        B[b(n), c(n)] += bwd

    M = np.block([[A, B], [-np.conj(B), -np.conj(A)]])
    return RealSpaceBdG(N=N, matrix=M, constant=float(np.trace(A).real) / 2.0)


def realspace_spectrum(p: ModelParams) -> np.ndarray:
    """Sorted eigenvalues of the open-chain BdG matrix (symmetric about 0)."""
    return np.linalg.eigvalsh(build_realspace(p).matrix)


def _nambu_to_majorana(n_modes: int) -> np.ndarray:
    """T with Psi = T gamma, interleaved gammas: f_j = (g_{2j} - i g_{2j+1})/2."""
    T = np.zeros((2 * n_modes, 2 * n_modes), dtype=complex)
    for j in range(n_modes):
        T[j, 2 * j] = 0.5
        T[j, 2 * j + 1] = -0.5j
        T[n_modes + j, 2 * j] = 0.5
        T[n_modes + j, 2 * j + 1] = 0.5j
    return T


def majorana_realspace(rs: RealSpaceBdG, tol: float = 1e-10) -> tuple[np.ndarray, float]:
    """Real antisymmetric h with H = (i/4) gamma^T h gamma + const.

    Majoranas interleave flavor-major modes: mode j maps to (gamma_{2j},
    gamma_{2j+1}).  spec(i h) equals spec(M).
    """
    n_modes = 2 * rs.N
    T = _nambu_to_majorana(n_modes)
    K = T.conj().T @ rs.matrix @ T
    h = -1j * (K - K.T)
    return _real_antisymmetric(h, tol), rs.constant


def zero_modes(p: ModelParams, N: Optional[int] = None) -> ZeroModes:
    """Smallest |E| of the open chain and its eigenvector weight near the edges."""
    if N is not None:
        p = dataclasses.replace(p, N=int(N))
    rs = build_realspace(p)
    evals, evecs = np.linalg.eigh(rs.matrix)
    j = int(np.argmin(np.abs(evals)))
    vec = evecs[:, j]
    w = max(1, int(round(0.1 * p.N)))
    sites = np.concatenate([np.arange(w), np.arange(p.N - w, p.N)])
    idx = np.concatenate([f * p.N + sites for f in range(4)])
    weight = float(np.sum(np.abs(vec[idx]) ** 2))
    return ZeroModes(E_min=float(abs(evals[j])), edge_weight=weight)


def ldos_curve(p: ModelParams, omegas, sites=None,
               broadening: Optional[float] = None) -> np.ndarray:
    """Local density of states on an energy grid, shape (len(omegas), len(sites)).

    rho(w, n) = -(1/pi) Im Tr_{flavor} [(w + i eta - H)^{-1}]_{nn}, evaluated
    through one full eigen-decomposition shared by every w.
    """
    eta = 0.02 * p.J if broadening is None else float(broadening)
    if eta <= 0.0:
        raise ValueError("broadening must be positive; the bare resolvent is singular on the spectrum")
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if sites is None:
        sites = np.arange(p.N)
    sites = np.atleast_1d(np.asarray(sites, dtype=int))
    rs = build_realspace(p)
    evals, evecs = np.linalg.eigh(rs.matrix)
    # site weight of each eigenvector, traced over the 4 flavor blocks
    prob = np.abs(evecs) ** 2
    site_weight = prob.reshape(4, p.N, 4 * p.N)[:, sites, :].sum(axis=0)  # (sites, modes)
    lorentz = (eta / math.pi) / ((omegas[:, None] - evals[None, :]) ** 2 + eta ** 2)
    return lorentz @ site_weight.T


def ldos(p: ModelParams, omega: float, site: int,
         broadening: Optional[float] = None) -> float:
    """LDOS at one energy and site; see ldos_curve."""
    return float(ldos_curve(p, [omega], [site], broadening)[0, 0])
