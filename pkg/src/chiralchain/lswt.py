"""Linear spin-wave treatment of the coupled chains.

Holstein-Primakoff bosons to first order in 1/S turn the model into a
quadratic boson Hamiltonian with pairing, whose dynamical matrix at each
momentum is a non-Hermitian 4x4 acting on (b_k, a_k, b_{-k}^dag,
a_{-k}^dag); a is the chain-A boson, b the chain-B magnon.  Para-unitary
(Hopfield-Bogoliubov) diagonalization yields the hybridized bands, the
dynamical-instability region, and the spin-wave estimate of the critical
coupling, which sits at half the free-fermion value.

Spin length enters only through the overall 2S multiplier (2S = 1 here).
"""
from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg
import scipy.optimize

from .params import ModelParams, momentum_grid

ETA = np.diag([1.0, 1.0, -1.0, -1.0])

STABLE_IMAG_TOL = 1e-10   # max |Im E| for a stable point
UNSTABLE_IMAG_TOL = 1e-8  # beyond this the point is definitely unstable
_TWO_S = 1.0


@dataclasses.dataclass
class HopfieldMatrix:
    k: float
    L: np.ndarray       # 4x4 dynamical matrix, rows (b_k, a_k, b_-k^+, a_-k^+)
    metric: np.ndarray  # eta = diag(1, 1, -1, -1)


@dataclasses.dataclass
class LswtModes:
    k: float
    eigenvalues: np.ndarray          # 4 complex, sorted by descending real part
    stable: bool                     # all |Im| below the stability tolerance
    marginal: bool                   # borderline imaginary parts or defective
    energies: np.ndarray | None      # the two physical band energies, descending
    transformation: np.ndarray | None  # para-unitary T with Psi = T Phi


@dataclasses.dataclass
class LswtThreshold:
    g_c: float
    k_c: float
    candidates: list[tuple[float, float]]  # (k, g) near-degenerate minima


def magnon_coupling(p: ModelParams, k: np.ndarray | float) -> np.ndarray | complex:
    """Momentum-space coupling 2g e^{ik/2} cos(phi + k/2)."""
    return 2.0 * p.g * np.exp(0.5j * np.asarray(k)) * np.cos(p.phi + np.asarray(k) / 2.0)


def magnon_dispersion(p: ModelParams, k: np.ndarray | float) -> np.ndarray | float:
    return p.Omega0 + 2.0 * p.J * np.cos(np.asarray(k))


def build_hopfield(p: ModelParams, k: float) -> HopfieldMatrix:
    """Dynamical matrix of the quadratic boson problem at momentum k.

    L is eta times a Hermitian form, so eta L eta = L^dag; its spectrum is
    closed under complex conjugation at fixed k and under E -> -E* only
    across k -> -k (the two coincide when |g_k| = |g_-k|).
    """
    gk = complex(magnon_coupling(p, k))
    gmk = complex(magnon_coupling(p, -k))
    Wk = float(magnon_dispersion(p, k))
    w0 = p.omega0
    L = _TWO_S * np.array(
        [
            [Wk, np.conj(gmk), 0.0, gk],
            [gmk, w0, gmk, 0.0],
            [0.0, -np.conj(gmk), -Wk, -gk],
            [-np.conj(gk), 0.0, -np.conj(gk), -w0],
        ],
        dtype=complex,
    )
    return HopfieldMatrix(k=float(k), L=L, metric=ETA)


def _colpa(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Para-unitary diagonalization of a positive-definite Hermitian form.

    Returns (energies of the 4 Bogoliubov components, T) with Psi = T Phi,
    T^dag H T diagonal and T eta T^dag = eta.  Raises LinAlgError when H
    is not positive definite (at or beyond the instability).
    """
    K = np.linalg.cholesky(H).conj().T  # H = K^dag K
    W = K @ ETA @ K.conj().T
    w, V = np.linalg.eigh(W)
    # two positive and two negative Krein branches; order (+ desc, - asc)
    pos = np.argsort(-w[w > 0])
    neg = np.argsort(w[w < 0])
    if (w > 0).sum() != 2:
        raise np.linalg.LinAlgError("Krein signature is not (2, 2)")
    Vp = V[:, w > 0][:, pos]
    Vn = V[:, w < 0][:, neg]
    V = np.hstack([Vp, Vn])
    d = np.concatenate([w[w > 0][pos], w[w < 0][neg]])
    E = np.abs(d)
    T = np.linalg.solve(K, V * np.sqrt(E)[None, :])
    return E, T


def para_diagonalize(L: HopfieldMatrix) -> LswtModes:
    """Spectrum and stability of the dynamical matrix.

    Stable points also carry the para-unitary transformation; borderline
    imaginary parts (defective-matrix noise at the threshold) are flagged
    marginal rather than raising.
    """
    ev = np.linalg.eigvals(L.L)
    order = np.lexsort((-ev.imag, -ev.real))
    ev = ev[order]
    worst = float(np.max(np.abs(ev.imag)))
    stable = worst < STABLE_IMAG_TOL
    marginal = STABLE_IMAG_TOL <= worst <= UNSTABLE_IMAG_TOL
    energies = None
    T = None
    if stable:
        H = L.metric @ L.L
        H = 0.5 * (H + H.conj().T)
        try:
            E, T = _colpa(H)
            energies = np.sort(E[:2])[::-1]
        except np.linalg.LinAlgError:
            # real spectrum but indefinite Hermitian form: threshold point
            stable = False
            marginal = True
    return LswtModes(
        k=L.k,
        eigenvalues=ev,
        stable=stable,
        marginal=marginal,
        energies=energies,
        transformation=T,
    )


def threshold_curve(p: ModelParams, phi: float, k: np.ndarray | float) -> np.ndarray:
    """Coupling at which mode k loses stability; inf where it never does,
    0 where the bare magnon branch is already soft."""
    k = np.asarray(k, dtype=float)
    denom = 8.0 * (1.0 + np.cos(2.0 * phi) * np.cos(k))
    num = p.omega0 * (p.Omega0 + 2.0 * p.J * np.cos(k))
    out = np.full(np.shape(k), np.inf)
    good = denom > 1e-15
    ratio = np.where(good, num / np.where(good, denom, 1.0), np.inf)
    out = np.where(good & (ratio >= 0), np.sqrt(np.abs(ratio)), out)
    out = np.where(good & (ratio < 0), 0.0, out)
    return out


def instability_threshold(p: ModelParams, phi: float | None = None) -> LswtThreshold:
    """Smallest coupling with a dynamically unstable mode.

    Dense scan over k then golden-section refinement; the minimizing
    momentum jumps between the k = 0 and k = pi branches as phi crosses
    pi/4, so near-degenerate minima are reported as candidates.
    """
    if phi is None:
        phi = p.phi
    if not 0.0 <= phi <= np.pi / 2 + 1e-12:
        raise ValueError(f"phi must lie in [0, pi/2], got {phi}")
    ks = np.linspace(0.0, np.pi, 4096)
    vals = threshold_curve(p, phi, ks)
    i = int(np.argmin(vals))
    lo = ks[max(i - 1, 0)]
    hi = ks[min(i + 1, len(ks) - 1)]
    if hi > lo:
        res = scipy.optimize.minimize_scalar(
            lambda k: float(threshold_curve(p, phi, k)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        k_c, g_c = float(res.x), float(res.fun)
        if vals[i] < g_c:
            k_c, g_c = float(ks[i]), float(vals[i])
    else:
        k_c, g_c = float(ks[i]), float(vals[i])
    if not np.isfinite(g_c):
        raise ValueError("no unstable mode at any coupling for these parameters")

    # instability condition |g_-k|^2 + |g_k|^2 = w0 W_k / 2 at the solution
    pc = dataclasses.replace(p, g=g_c, phi=phi)
    lhs = abs(magnon_coupling(pc, -k_c)) ** 2 + abs(magnon_coupling(pc, k_c)) ** 2
    rhs = p.omega0 * float(magnon_dispersion(p, k_c)) / 2.0
    if abs(lhs - rhs) > 1e-8 * max(1.0, abs(rhs)):
        raise RuntimeError(
            f"threshold point failed the instability condition: {lhs} vs {rhs}"
        )

    candidates = [(k_c, g_c)]
    for k_end in (0.0, np.pi):
        g_end = float(threshold_curve(p, phi, k_end))
        if abs(k_end - k_c) > 1e-6 and np.isfinite(g_end) and g_end <= g_c * (1 + 1e-3):
            candidates.append((k_end, g_end))
    candidates.sort(key=lambda t: t[1])
    return LswtThreshold(g_c=g_c, k_c=k_c, candidates=candidates)


def lswt_observables(
    p: ModelParams,
    g_values: np.ndarray | list[float],
    n_k: int = 1024,
) -> dict[str, np.ndarray]:
    """Spin-wave ground-state curves below the instability.

    Returns per-spin magnetization and per-spin ground-state energy
    (relative to the fully polarized state) on the requested couplings.
    Couplings at or beyond the instability threshold are a domain error:
    the quadratic theory has no ground state there.
    """
    g_values = np.asarray(g_values, dtype=float)
    thr = instability_threshold(p)
    if np.any(g_values >= thr.g_c):
        bad = g_values[g_values >= thr.g_c]
        raise ValueError(
            f"couplings {bad} at or beyond the instability threshold "
            f"{thr.g_c:.6f}; the spin-wave ground state exists only below it"
        )
    ks = momentum_grid(n_k).points
    mag = np.empty_like(g_values)
    energy = np.empty_like(g_values)
    for j, g in enumerate(g_values):
        pg = dataclasses.replace(p, g=float(g))
        zero_point = 0.0
        occupation = 0.0
        for k in ks:
            modes = para_diagonalize(build_hopfield(pg, float(k)))
            if modes.transformation is None:
                raise ValueError(
                    f"mode k={k:.6f} unstable at g={g} despite threshold check"
                )
            e1, e2 = modes.energies
            zero_point += 0.5 * (e1 + e2 - magnon_dispersion(pg, float(k)) - p.omega0)
            T = modes.transformation
            occupation += float(np.sum(np.abs(T[0, 2:]) ** 2 + np.abs(T[1, 2:]) ** 2))
        mag[j] = -0.5 + occupation / (2.0 * n_k)
        energy[j] = zero_point / (2.0 * n_k)
    return {"g": g_values, "magnetization": mag, "gs_energy": energy}
