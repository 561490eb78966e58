"""Ground-state covariance of the quadratic model and observables built on it.

The Bogoliubov ground state of the open-chain BdG matrix is encoded in
three equivalent objects: C_ij = <f_i^dag f_j>, F_ij = <f_i f_j> over the
flavor-major mode index (b_0..b_{N-1}, c_0..c_{N-1}), and the real
antisymmetric Majorana covariance M_ab = (i/2)<[gamma_a, gamma_b]> in
interleaved ordering (mode j maps to gamma_{2j} = f + f^dag and
gamma_{2j+1} = i(f - f^dag)).  Everything downstream is Wick algebra on
M: entanglement spectra from subsystem blocks, string spin correlators
and vector chirality from Pfaffians of Majorana monomials.
"""

from __future__ import annotations

import dataclasses
import heapq
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .params import ModelParams
from .pfaffian import pfaffian
from .topology import RealSpaceBdG, build_realspace

__all__ = [
    "CovarianceData",
    "EntanglementData",
    "BoundaryWarning",
    "ground_covariance",
    "gaussian_parity",
    "entanglement_ff",
    "schmidt_gap_map",
    "spin_correlator_xx",
    "chirality_ff",
    "order_parameter_ff",
]


class BoundaryWarning(UserWarning):
    """Correlator endpoints close to the open ends; boundary effects likely."""


@dataclass(frozen=True)
class CovarianceData:
    N: int
    C: np.ndarray           # 2N x 2N, <f_i^dag f_j>
    F: np.ndarray           # 2N x 2N antisymmetric, <f_i f_j>
    majorana_M: np.ndarray  # 4N x 4N real antisymmetric


@dataclass(frozen=True)
class EntanglementData:
    subsystem: tuple[int, int]
    rdm_spectrum: np.ndarray  # descending, truncated
    entropy: float            # nats, from all single-particle levels
    schmidt_gap: float


def _ph_conjugate(v: np.ndarray) -> np.ndarray:
    """X conj(v) with X the particle-hole block swap."""
    half = len(v) // 2
    return np.concatenate([np.conj(v[half:]), np.conj(v[:half])])


def _majorana_covariance(C: np.ndarray, F: np.ndarray) -> np.ndarray:
    n = C.shape[0]
    M = np.empty((2 * n, 2 * n))
    M[0::2, 0::2] = -2.0 * C.imag - 2.0 * F.imag
    M[1::2, 1::2] = -2.0 * C.imag + 2.0 * F.imag
    Q = np.eye(n) - 2.0 * C.real - 2.0 * F.real
    M[0::2, 1::2] = Q
    M[1::2, 0::2] = -Q.T
    return 0.5 * (M - M.T)


def _null_pair_member(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Vector v in span{u1, u2} with <v, X conj(v)> = 0.

    The zero-energy eigenspace is particle-hole closed; a filled mode must
    be orthogonal to its own PH image.  The condition is a quadratic in
    the conjugated coefficients.
    """
    T = np.array([
        [np.vdot(u1, _ph_conjugate(u1)), np.vdot(u1, _ph_conjugate(u2))],
        [np.vdot(u2, _ph_conjugate(u1)), np.vdot(u2, _ph_conjugate(u2))],
    ])
    T = 0.5 * (T + T.T)
    if abs(T[1, 1]) > 1e-14:
        disc = np.sqrt(T[0, 1] ** 2 - T[0, 0] * T[1, 1])
        t = (-T[0, 1] + disc) / T[1, 1]
        coeff = np.array([1.0, t])
    elif abs(T[0, 1]) > 1e-14:
        coeff = np.array([1.0, -T[0, 0] / (2.0 * T[0, 1])])
    else:
        coeff = np.array([1.0, 0.0])
    v = np.conj(coeff[0]) * u1 + np.conj(coeff[1]) * u2
    v = v / np.linalg.norm(v)
    res = abs(np.vdot(v, _ph_conjugate(v)))
    if res > 1e-8:
        raise RuntimeError(f"particle-hole adaptation of the zero pair failed (residual {res:.2e})")
    return v


def gaussian_parity(majorana_M: np.ndarray) -> int:
    """Fermion parity of a pure Gaussian state, sgn Pf(M)."""
    pf = pfaffian(majorana_M, tol=1e-6)
    if pf == 0.0:
        raise ValueError("Pfaffian of the covariance vanished; state is not pure")
    return 1 if pf > 0.0 else -1


def _covariance_from_fill(filled: np.ndarray, N: int) -> CovarianceData:
    G = filled @ filled.conj().T  # <Psi_a Psi_b^dag>
    n = 2 * N
    C = np.eye(n) - G[:n, :n].T
    F = G[:n, n:]
    C = 0.5 * (C + C.conj().T)
    F = 0.5 * (F - F.T)
    return CovarianceData(N=N, C=C, F=F, majorana_M=_majorana_covariance(C, F))


def ground_covariance(rs: RealSpaceBdG, parity: Optional[str] = None,
                      zero_tol: float = 1e-10) -> CovarianceData:
    """Covariance of the BdG ground state (fill every negative-energy mode).

    With zero modes present (|E| <= zero_tol) the ground state is doubly
    degenerate and `parity` ("even"/"odd") must pick the sector; the zero
    pair is particle-hole adapted before filling.  When a parity is
    requested for a nondegenerate spectrum and the filled state disagrees,
    the cheapest quasiparticle (smallest |E|) is flipped, which matches
    the sector-restricted ground state of exact diagonalization.
    """
    if parity not in (None, "even", "odd"):
        raise ValueError(f"parity must be None, 'even', or 'odd', got {parity!r}")
    evals, evecs = np.linalg.eigh(rs.matrix)
    zero = np.abs(evals) <= zero_tol
    n_zero = int(np.sum(zero))
    want = None if parity is None else (1 if parity == "even" else -1)
    if n_zero == 0:
        filled = evecs[:, evals > 0.0]
        cov = _covariance_from_fill(filled, rs.N)
        if want is not None and gaussian_parity(cov.majorana_M) != want:
            pos = np.where(evals > 0.0)[0]
            j = pos[int(np.argmin(evals[pos]))]
            swapped = filled.copy()
            col = int(np.where(pos == j)[0][0])
            swapped[:, col] = _ph_conjugate(evecs[:, j])
            cov = _covariance_from_fill(swapped, rs.N)
        return cov
    if n_zero != 2:
        raise ValueError(f"expected a single zero pair, found {n_zero} modes below {zero_tol:.1e}")
    if want is None:
        raise ValueError(
            "zero modes present: the ground state is degenerate, pass parity='even' or 'odd'")
    iz = np.where(zero)[0]
    v = _null_pair_member(evecs[:, iz[0]], evecs[:, iz[1]])
    strict = evecs[:, evals > zero_tol]
    filled = np.column_stack([strict, v])
    if filled.shape[1] != 2 * rs.N:
        raise RuntimeError("mode count mismatch while filling the degenerate ground state")
    cov = _covariance_from_fill(filled, rs.N)
    if gaussian_parity(cov.majorana_M) != want:
        filled[:, -1] = _ph_conjugate(v)
        cov = _covariance_from_fill(filled, rs.N)
    return cov


# ---------------------------------------------------------------------------
# entanglement from subsystem Majorana blocks

def _binary_entropy(p: np.ndarray) -> float:
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = -p * np.log(p) - (1.0 - p) * np.log(1.0 - p)
    return float(np.sum(np.nan_to_num(terms)))


def _top_products(p: np.ndarray, K: int) -> np.ndarray:
    """K largest products prod_l (p_l or 1-p_l), descending, via best-first search."""
    p = np.clip(p, 0.0, 1.0)
    hi = np.maximum(p, 1.0 - p)
    lo = np.minimum(p, 1.0 - p)
    with np.errstate(divide="ignore"):
        base = float(np.sum(np.log(hi)))
        ratio = np.log(lo) - np.log(hi)  # <= 0
    # keep heap arithmetic finite when lo == 0; exp(-800) underflows to 0.0
    ratio = np.sort(np.maximum(ratio, -800.0))[::-1]
    L = len(ratio)
    out = [base]
    heap: list[tuple[float, int]] = []
    if L > 0:
        heapq.heappush(heap, (-(base + ratio[0]), 0))
    while heap and len(out) < K:
        negscore, j = heapq.heappop(heap)
        score = -negscore
        out.append(score)
        if j + 1 < L:
            heapq.heappush(heap, (-(score + ratio[j + 1]), j + 1))          # extend
            heapq.heappush(heap, (-(score - ratio[j] + ratio[j + 1]), j + 1))  # replace max
    lam = np.exp(np.array(out[:K]))
    return np.sort(lam)[::-1]


def subsystem_majorana_rows(N: int, lo: int, hi: int) -> np.ndarray:
    """Majorana covariance rows of rungs lo..hi-1 (both flavors)."""
    sites = np.arange(lo, hi)
    modes = np.concatenate([sites, N + sites])
    return np.sort(np.concatenate([2 * modes, 2 * modes + 1]))


def entanglement_ff(cov: CovarianceData, cut: int, K: int = 64) -> EntanglementData:
    """Entanglement of rungs [0, cut) from the subsystem Majorana covariance.

    Single-particle levels nu give occupations p = (1 + nu)/2; the entropy
    sums their binary entropies exactly, while the many-body spectrum is
    truncated to the K largest occupation products.
    """
    if not 0 < cut < cov.N:
        raise ValueError(f"cut must satisfy 0 < cut < N = {cov.N}, got {cut}")
    rows = subsystem_majorana_rows(cov.N, 0, cut)
    sub = cov.majorana_M[np.ix_(rows, rows)]
    nu = np.linalg.eigvalsh(1j * sub)
    nu = np.sort(nu)[::-1][: len(rows) // 2]  # one per subsystem mode
    p = np.clip((1.0 + nu) / 2.0, 0.0, 1.0)
    lam = _top_products(p, K)
    gap = float(lam[0] - lam[1]) if len(lam) > 1 else float(lam[0])
    return EntanglementData(
        subsystem=(0, cut),
        rdm_spectrum=lam,
        entropy=_binary_entropy(p),
        schmidt_gap=gap,
    )


def schmidt_gap_map(p: ModelParams, g_values: Sequence[float], phi_values: Sequence[float],
                    cut: Optional[int] = None, parity: str = "even") -> np.ndarray:
    """Schmidt gap on a (phi, g) grid; failed points become NaN."""
    cut = p.N // 2 if cut is None else int(cut)
    out = np.full((len(phi_values), len(g_values)), np.nan)
    for i, phi in enumerate(phi_values):
        for j, g in enumerate(g_values):
            try:
                rs = build_realspace(dataclasses.replace(p, g=float(g), phi=float(phi)))
                cov = ground_covariance(rs, parity=parity)
                out[i, j] = entanglement_ff(cov, cut).schmidt_gap
            except (ValueError, RuntimeError, np.linalg.LinAlgError):
                continue
    return out


# ---------------------------------------------------------------------------
# Majorana monomial algebra for string operators

def _sort_sign(idx: Sequence[int]) -> tuple[int, np.ndarray]:
    """Stable sort of Majorana indices with the anticommutation sign."""
    a = np.asarray(idx, dtype=np.int64)
    perm = np.argsort(a, kind="stable")
    seen = np.zeros(len(perm), dtype=bool)
    transpositions = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        transpositions += length - 1
    return (-1 if transpositions % 2 else 1), a[perm]


def _reduce_monomial(coeff: complex, idx: Sequence[int]) -> tuple[complex, np.ndarray]:
    """Canonical form of a Majorana monomial: sorted distinct indices, gamma^2 = 1."""
    if len(idx) == 0:
        return coeff, np.empty(0, dtype=np.int64)
    sign, s = _sort_sign(idx)
    keep = []
    i = 0
    while i < len(s):
        if i + 1 < len(s) and s[i] == s[i + 1]:
            i += 2  # adjacent equal pair cancels, no extra sign
            continue
        keep.append(s[i])
        i += 1
    return coeff * sign, np.asarray(keep, dtype=np.int64)


def _expectation(cov: CovarianceData, coeff: complex, idx: Sequence[int]) -> complex:
    """<coeff * gamma_{i1} ... gamma_{i2q}> via Wick's theorem, Pf(-i M_sub)."""
    coeff, s = _reduce_monomial(coeff, idx)
    if len(s) % 2:
        return 0.0
    if len(s) == 0:
        return coeff
    sub = cov.majorana_M[np.ix_(s, s)]
    return coeff * (-1j) ** (len(s) // 2) * pfaffian(sub, tol=1e-8)


def _b1(n: int) -> int:
    return 2 * n


def _b2(n: int) -> int:
    return 2 * n + 1


def _c1(N: int, n: int) -> int:
    return 2 * (N + n)


def _c2(N: int, n: int) -> int:
    return 2 * (N + n) + 1


def _string(N: int, n: int) -> list[int]:
    """Jordan-Wigner string through every mode of rungs l < n, coefficient (-1)^n."""
    out: list[int] = []
    for l in range(n):
        out += [_b1(l), _b2(l), _c1(N, l), _c2(N, l)]
    return out


def _spin_op(N: int, n: int, axis: str) -> tuple[complex, list[int]]:
    """S^alpha_n as a Majorana monomial (coefficient, ordered index list)."""
    sgn = -1.0 if n % 2 else 1.0
    if axis == "xB":
        return 0.5 * sgn, [_b1(n)] + _string(N, n)
    if axis == "yB":
        return 0.5 * sgn, [_b2(n)] + _string(N, n)
    if axis == "xA":
        return 0.5j * sgn, [_c1(N, n), _b1(n), _b2(n)] + _string(N, n)
    if axis == "yA":
        return 0.5j * sgn, [_c2(N, n), _b1(n), _b2(n)] + _string(N, n)
    if axis == "zB":
        return -0.5j, [_b1(n), _b2(n)]
    if axis == "zA":
        return -0.5j, [_c1(N, n), _c2(N, n)]
    raise ValueError(f"unknown spin axis {axis!r}")


def _product_expectation(cov: CovarianceData, ops: Sequence[tuple[complex, list[int]]]) -> complex:
    coeff = 1.0 + 0.0j
    idx: list[int] = []
    for c, i in ops:
        coeff *= c
        idx += i
    return _expectation(cov, coeff, idx)


def spin_correlator_xx(cov: CovarianceData, n: int, m: int, axis: str = "xB") -> float:
    """<S^alpha_n S^alpha_m> from the Pfaffian of the string-generated monomial.

    axis: "xB" (x on chain B), "xA" / "yA" (x / y on chain A); "yB" and the
    z axes are accepted for completeness.
    """
    if not 0 <= n < m < cov.N:
        raise ValueError(f"need 0 <= n < m < N, got n={n}, m={m}, N={cov.N}")
    if n == 0 or m == cov.N - 1:
        warnings.warn("correlator endpoint on the chain boundary", BoundaryWarning, stacklevel=2)
    val = _product_expectation(cov, [_spin_op(cov.N, n, axis), _spin_op(cov.N, m, axis)])
    if abs(val.imag) > 1e-8:
        raise RuntimeError(f"correlator came out complex ({val:.3e}); covariance inconsistent")
    return float(val.real)


def chirality_ff(cov: CovarianceData, chain: str = "B", n: Optional[int] = None) -> float:
    """z component of the vector spin chirality <(S_n x S_{n+1})^z> on one chain.

    Defaults to the central bond.  Wick contraction of the quartic product;
    the Jordan-Wigner strings collapse to a 4-Majorana Pfaffian.
    """
    if chain not in ("A", "B"):
        raise ValueError(f"chain must be 'A' or 'B', got {chain!r}")
    n = cov.N // 2 - 1 if n is None else int(n)
    if not 0 <= n < cov.N - 1:
        raise ValueError(f"bond index out of range: {n}")
    x, y = ("xA", "yA") if chain == "A" else ("xB", "yB")
    val = (_product_expectation(cov, [_spin_op(cov.N, n, x), _spin_op(cov.N, n + 1, y)])
           - _product_expectation(cov, [_spin_op(cov.N, n, y), _spin_op(cov.N, n + 1, x)]))
    if abs(val.imag) > 1e-8:
        raise RuntimeError(f"chirality came out complex ({val:.3e}); covariance inconsistent")
    return float(val.real)


def order_parameter_ff(p: ModelParams, N: Optional[int] = None, chain: str = "B") -> float:
    """Stripe order parameter sqrt(<S^a S^a>) at separation 3N/4.

    Anchored at sites (N/8, N/8 + 3N/4) to keep the full separation inside
    the open chain.  The axis follows the ordered phase: x on chain B
    everywhere; x on chain A below phi = pi/4 and y above.
    """
    if N is not None:
        p = dataclasses.replace(p, N=int(N))
    if p.N % 4:
        raise ValueError(f"order parameter needs N divisible by 4, got {p.N}")
    if chain == "B":
        axis = "xB"
    elif chain == "A":
        axis = "xA" if p.phi <= math.pi / 4 else "yA"
    else:
        raise ValueError(f"chain must be 'A' or 'B', got {chain!r}")
    cov = ground_covariance(build_realspace(p), parity="even")
    n0 = p.N // 8
    corr = spin_correlator_xx(cov, n0, n0 + 3 * p.N // 4, axis)
    if corr < -1e-8:
        raise ValueError(
            f"correlator {corr:.3e} is negative: axis {axis} does not match the ordered phase")
    return math.sqrt(max(corr, 0.0))
