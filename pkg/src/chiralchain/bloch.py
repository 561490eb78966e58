"""Bloch-space Bogoliubov-de Gennes solver for the coupled chains.

The quadratic fermion Hamiltonian is block-diagonal in momentum; each block
is a 4x4 Hermitian matrix in the Nambu basis (b_k, c_k, b_{-k}^dag,
c_{-k}^dag) with symbols

    Omega_k   = Omega0 + 2 J cos k
    gamma_k   = 2 i g e^{-i k/2} sin(phi - k/2)
    Upsilon_k = 2 g e^{-i k/2} cos(phi - k/2)

This module builds the blocks, evaluates bands and gaps, verifies the
particle-hole constraint and the extra phi = pi/2 antiunitary symmetry,
and provides the closed-form critical coupling together with a scan-based
bisection locator.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import ModelParams, MomentumGrid, momentum_grid

__all__ = [
    "BlochSymbols",
    "BlochMatrix",
    "BandStructure",
    "StrongCoupling",
    "build_bloch",
    "bloch_batch",
    "band_structure",
    "check_phc",
    "phc_holds",
    "check_antiunitary_pi_half",
    "critical_coupling",
    "critical_branch",
    "gap_scan",
    "critical_coupling_scan",
    "strong_coupling",
]

#: unitary part of the particle-hole conjugation X = (sigma^x x I_2) K
PHC_UNITARY = np.array(
    [[0, 0, 1, 0],
     [0, 0, 0, 1],
     [1, 0, 0, 0],
     [0, 1, 0, 0]], dtype=float)

#: unitary part of the phi = pi/2 antiunitary symmetry S = (I_2 x sigma^z) K
ANTIUNITARY_PI_HALF = np.diag([1.0, -1.0, 1.0, -1.0])


@dataclass(frozen=True)
class BlochSymbols:
    Omega_k: float
    gamma_k: complex
    Upsilon_k: complex


@dataclass(frozen=True)
class BlochMatrix:
    k: float
    entries: np.ndarray  # 4x4 complex Hermitian
    symbols: BlochSymbols


@dataclass(frozen=True)
class BandStructure:
    grid: MomentumGrid
    bands: np.ndarray  # (count, 4) ascending per k
    constant: float    # E0 = J sum_k cos k + N (omega0 + Omega0) / 2


@dataclass(frozen=True)
class StrongCoupling:
    energies: np.ndarray          # 4 flat levels, ascending
    gs_energy_per_site: float


def _symbols(p: ModelParams, k):
    k = np.asarray(k, dtype=float)
    Omega_k = p.Omega0 + 2.0 * p.J * np.cos(k)
    phase = np.exp(-0.5j * k)
    gamma_k = 2.0j * p.g * phase * np.sin(p.phi - 0.5 * k)
    Upsilon_k = 2.0 * p.g * phase * np.cos(p.phi - 0.5 * k)
    return Omega_k, gamma_k, Upsilon_k


def bloch_batch(p: ModelParams, k) -> np.ndarray:
    """Stack of Bloch matrices, shape (len(k), 4, 4)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    Om, ga, Up = _symbols(p, k)
    Omm, gam, Upm = _symbols(p, -k)
    H = np.zeros((len(k), 4, 4), dtype=complex)
    H[:, 0, 0] = Om
    H[:, 0, 1] = np.conj(Up)
    H[:, 0, 3] = -gam
    H[:, 1, 0] = Up
    H[:, 1, 1] = p.omega0
    H[:, 1, 2] = ga
    H[:, 2, 1] = np.conj(ga)
    H[:, 2, 2] = -Om          # Omega_{-k} = Omega_k
    H[:, 2, 3] = -Upm
    H[:, 3, 0] = -np.conj(gam)
    H[:, 3, 2] = -np.conj(Upm)
    H[:, 3, 3] = -p.omega0
    return H


def build_bloch(p: ModelParams, k: float, gauge: bool = True) -> BlochMatrix:
    """4x4 Bloch BdG block at momentum k.

    gauge=False strips the e^{-ik/2} bond phase from gamma_k and
    Upsilon_k (pure convention; spectra are unaffected).  At phi = 0 the
    ungauged matrix is real after rotating the hole block by i.
    """
    Om, ga, Up = _symbols(p, k)
    H = bloch_batch(p, [k])[0]
    if not gauge:
        # half-site shift of chain A: phases live on the c-flavor rows
        U = np.diag([1.0, np.exp(0.5j * k), 1.0, np.exp(0.5j * k)])
        H = U @ H @ U.conj().T
        phase = np.exp(0.5j * k)
        ga = ga * phase
        Up = Up * phase
    return BlochMatrix(k=float(k), entries=H,
                       symbols=BlochSymbols(float(Om), complex(ga), complex(Up)))


def band_structure(p: ModelParams, grid: Optional[MomentumGrid] = None) -> BandStructure:
    """Sorted eigenvalues of the Bloch blocks on a momentum grid."""
    if grid is None:
        grid = momentum_grid(p.N, "periodic")
    H = bloch_batch(p, grid.points)
    bands = np.linalg.eigvalsh(H)  # ascending along the last axis
    E0 = p.J * float(np.sum(np.cos(grid.points))) + p.N * (p.omega0 + p.Omega0) / 2.0
    return BandStructure(grid=grid, bands=bands, constant=E0)


def phc_holds(H_k: np.ndarray, H_mk: np.ndarray, tol: float = 1e-12) -> bool:
    """Entrywise check of X conj(H_k) X^{-1} = -H_{-k}."""
    X = PHC_UNITARY
    return bool(np.max(np.abs(X @ np.conj(H_k) @ X - (-H_mk))) <= tol)


def check_phc(p: ModelParams, k: float, tol: float = 1e-12) -> bool:
    """Particle-hole constraint at momentum k (holds by construction)."""
    H_k = bloch_batch(p, [k])[0]
    H_mk = bloch_batch(p, [-k])[0]
    return phc_holds(H_k, H_mk, tol)


def check_antiunitary_pi_half(p: ModelParams, k: float, tol: float = 1e-12) -> bool:
    """Extra antiunitary symmetry S conj(H_k) S^{-1} = H_{-k} at phi = pi/2."""
    if abs(p.phi - math.pi / 2) > 1e-12:
        raise ValueError(f"the extra antiunitary symmetry requires phi = pi/2, got phi = {p.phi}")
    S = ANTIUNITARY_PI_HALF
    H_k = bloch_batch(p, [k])[0]
    H_mk = bloch_batch(p, [-k])[0]
    return bool(np.max(np.abs(S @ np.conj(H_k) @ S - H_mk)) <= tol)


def critical_branch(phi: float) -> str:
    """Which momentum closes the gap on the critical line: 'k0', 'kpi' or 'none'."""
    quarter = math.pi / 4
    if abs(phi - quarter) < 1e-12:
        return "none"
    return "k0" if phi < quarter else "kpi"


def critical_coupling(omega0: float, Omega0: float, J: float, phi: float) -> Optional[float]:
    """Closed-form critical coupling g_c(phi), or None when no transition exists.

    g_c = (1/2) sqrt(omega0 (Omega0 + 2J) / cos 2phi)   for phi in [0, pi/4)
    g_c = (1/2) sqrt(omega0 (Omega0 - 2J) / |cos 2phi|) for phi in (pi/4, pi/2]

    Exactly at phi = pi/4 the formula diverges (no transition at finite g).
    Outside the gapped regime a non-positive radicand also returns None.
    """
    branch = critical_branch(phi)
    if branch == "none":
        return None
    c2 = abs(math.cos(2.0 * phi))
    num = omega0 * (Omega0 + 2.0 * J) if branch == "k0" else omega0 * (Omega0 - 2.0 * J)
    if num <= 0.0 or c2 == 0.0:
        return None
    return 0.5 * math.sqrt(num / c2)


def _min_abs_eig(p: ModelParams, k) -> np.ndarray:
    H = bloch_batch(p, k)
    return np.min(np.abs(np.linalg.eigvalsh(H)), axis=-1)


def gap_scan(p: ModelParams, grid: Optional[MomentumGrid] = None,
             refine: bool = True) -> tuple[float, float]:
    """Minimum over k of the smallest |E|, with the arg-min momentum.

    Default grid: 2048 points (contains k = 0 and pi exactly).  The coarse
    minimum is refined by golden-section search in the bracketing interval.
    """
    if grid is None:
        grid = momentum_grid(2048, "scan")
    k = grid.points
    gaps = _min_abs_eig(p, k)
    j = int(np.argmin(gaps))
    best_gap, best_k = float(gaps[j]), float(k[j])
    if not refine or len(k) < 3:
        return best_gap, best_k
    lo = k[j - 1] if j > 0 else k[j] - (k[1] - k[0])
    hi = k[j + 1] if j < len(k) - 1 else k[j] + (k[1] - k[0])

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = float(_min_abs_eig(p, [c])[0])
    fd = float(_min_abs_eig(p, [d])[0])
    for _ in range(60):
        if b - a < 1e-12:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(_min_abs_eig(p, [c])[0])
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(_min_abs_eig(p, [d])[0])
    k_ref = 0.5 * (a + b)
    g_ref = float(_min_abs_eig(p, [k_ref])[0])
    if g_ref < best_gap:
        best_gap, best_k = g_ref, k_ref
    return best_gap, best_k


# Majorana basis change (2x2 blocks of I_2): used only for the signed
# gap-closing locator below; the topology module holds the public version.
_W_MAJORANA = np.block([
    [np.eye(2), np.eye(2)],
    [1j * np.eye(2), -1j * np.eye(2)],
])


def _pf_product(p: ModelParams) -> float:
    """Pf(i Htilde_0) * Pf(i Htilde_pi); flips sign exactly at a gap closing."""
    prod = 1.0
    for k in (0.0, math.pi):
        H = bloch_batch(p, [k])[0]
        A = (1j * (_W_MAJORANA @ H @ _W_MAJORANA.conj().T)).real
        A = 0.5 * (A - A.T)
        prod *= A[0, 1] * A[2, 3] - A[0, 2] * A[1, 3] + A[0, 3] * A[1, 2]
    return float(prod)


def critical_coupling_scan(p: ModelParams, g_max: float = 64.0,
                           tol: float = 1e-9) -> Optional[float]:
    """Locate the gap-closing coupling by bisection, independent of the formula.

    min-over-k |E| never changes sign, so the root is found on a signed
    proxy: the product of Majorana-basis Pfaffians at the two closing
    momenta flips sign transversally when a band crosses zero at k = 0 or
    pi (eigenvalues at those momenta come in +-E pairs, so determinants
    only touch zero).  The sign flip is bracketed by marching in g,
    bisected, and the root confirmed with a full gap_scan (< 1e-6).
    Returns None when no flip occurs below g_max (e.g. phi = pi/4).
    """

    def f(g: float) -> float:
        return _pf_product(dataclasses.replace(p, g=g))

    f_lo, g_lo = f(0.0), 0.0
    g_hi = None
    n_steps = 512
    for g in np.linspace(0.0, g_max, n_steps + 1)[1:]:
        val = f(float(g))
        if val == 0.0 or np.sign(val) != np.sign(f_lo):
            g_hi = float(g)
            break
        g_lo, f_lo = float(g), val
    if g_hi is None:
        return None
    for _ in range(200):
        if g_hi - g_lo < tol:
            break
        mid = 0.5 * (g_lo + g_hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            g_lo = g_hi = mid
            break
        if np.sign(f_mid) == np.sign(f_lo):
            g_lo, f_lo = mid, f_mid
        else:
            g_hi = mid
    root = 0.5 * (g_lo + g_hi)
    gap, _ = gap_scan(dataclasses.replace(p, g=root))
    if gap > 1e-6 * max(p.J, 1.0):
        raise RuntimeError(
            f"bisection found a Pfaffian sign flip at g = {root} but the "
            f"scanned gap there is {gap:.3e}; closing momentum outside {{0, pi}}?")
    return root


def strong_coupling(g: float, phi: float) -> StrongCoupling:
    """Flat bands and ground-state energy density in the g >> omega0, Omega0, J limit.

    Levels: +-2g(cos phi + sin phi), +-2g(cos phi - sin phi).
    E_GS/N = -4 g cos phi for phi <= pi/4, -4 g sin phi above (the quoted
    density convention; the first derivative in phi jumps at pi/4).
    """
    c, s = math.cos(phi), math.sin(phi)
    levels = np.sort(np.array([
        -2.0 * g * (c + s), -(2.0 * g * (c - s)),
        2.0 * g * (c - s), 2.0 * g * (c + s),
    ]))
    gs = -4.0 * g * c if phi <= math.pi / 4 else -4.0 * g * s
    return StrongCoupling(energies=levels, gs_energy_per_site=gs)
