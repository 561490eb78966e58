"""Gaussian-state correlators and entanglement against dense Fock oracles."""

import math

import numpy as np
import pytest

from chiralchain.params import ModelParams
from chiralchain.quadstate import (
    BoundaryWarning,
    chirality_ff,
    entanglement_ff,
    gaussian_parity,
    ground_covariance,
    order_parameter_ff,
    schmidt_gap_map,
    spin_correlator_xx,
)
from chiralchain.topology import build_realspace

from .oracles import (
    covariance_matrices,
    expectation,
    fock_hamiltonian,
    ground_state,
    jw_annihilator,
    schmidt_spectrum,
    sector_ground_state,
    spin_operator,
    spin_parity,
)


def _p(g, phi, N):
    return ModelParams(g=g, phi=phi, N=N)


def _fock(p):
    """Dense many-body Hamiltonian of the quadratic chain, plus annihilators."""
    rs = build_realspace(p)
    N = p.N
    A = rs.matrix[: 2 * N, : 2 * N]
    B = rs.matrix[: 2 * N, 2 * N :]
    order = np.concatenate([2 * np.arange(N), 2 * np.arange(N) + 1])
    H = fock_hamiltonian(A, B, order)
    ann = [jw_annihilator(int(order[i]), 2 * N) for i in range(2 * N)]
    return rs, H, ann


# -- ground-state covariance -------------------------------------------------


def test_covariance_matches_oracle():
    p = _p(0.9, 0.4, N=3)
    rs, H, ann = _fock(p)
    cov = ground_covariance(rs)
    _, psi = ground_state(H)
    C, F = covariance_matrices(psi, ann)
    assert np.allclose(cov.C, C, atol=1e-10)
    assert np.allclose(cov.F, F, atol=1e-10)


@pytest.mark.parametrize("parity,sign", [("even", 1), ("odd", -1)])
def test_sector_covariance_matches_oracle(parity, sign):
    p = _p(0.9, 0.4, N=3)
    rs, H, ann = _fock(p)
    cov = ground_covariance(rs, parity=parity)
    assert gaussian_parity(cov.majorana_M) == sign
    _, psi = sector_ground_state(H, 2 * p.N, sign)
    C, F = covariance_matrices(psi, ann)
    assert np.allclose(cov.C, C, atol=1e-10)
    assert np.allclose(cov.F, F, atol=1e-10)


def test_covariance_is_pure():
    p = _p(1.4, 1.0, N=6)
    rs = build_realspace(p)
    for parity in (None, "even", "odd"):
        cov = ground_covariance(rs, parity=parity)
        M = cov.majorana_M
        assert np.max(np.abs(M.imag if np.iscomplexobj(M) else 0.0)) == 0.0
        assert np.allclose(M, -M.T, atol=1e-10)
        assert np.allclose(M @ M, -np.eye(4 * p.N), atol=1e-8)


def test_parity_matches_oracle_expectation():
    p = _p(0.7, 0.9, N=3)
    rs, H, _ = _fock(p)
    _, psi = ground_state(H)
    P = spin_parity(p.N)
    expected = expectation(psi, P)
    assert abs(expected.imag) < 1e-10
    cov = ground_covariance(rs)
    assert gaussian_parity(cov.majorana_M) == int(round(expected.real))


def test_degenerate_ground_state_requires_parity():
    # deep topological point: exact zero pair on the open chain
    p = _p(2.0, math.pi / 2, N=60)
    rs = build_realspace(p)
    with pytest.raises(ValueError, match="parity"):
        ground_covariance(rs)
    even = ground_covariance(rs, parity="even")
    odd = ground_covariance(rs, parity="odd")
    assert gaussian_parity(even.majorana_M) == 1
    assert gaussian_parity(odd.majorana_M) == -1
    for cov in (even, odd):
        assert np.allclose(cov.majorana_M @ cov.majorana_M, -np.eye(4 * p.N), atol=1e-8)


def test_rejects_unknown_parity():
    rs = build_realspace(_p(1.0, 0.2, N=4))
    with pytest.raises(ValueError):
        ground_covariance(rs, parity="both")


# -- entanglement ------------------------------------------------------------


def test_entanglement_matches_schmidt_oracle():
    p = _p(1.2, 0.5, N=4)
    rs, H, _ = _fock(p)
    cov = ground_covariance(rs)
    _, psi = ground_state(H)
    for cut in (1, 2, 3):
        ent = entanglement_ff(cov, cut)
        lam = schmidt_spectrum(psi, 2 * cut, 2 * p.N)
        lam = lam[lam > 1e-14]
        k = min(len(lam), len(ent.rdm_spectrum))
        assert np.allclose(ent.rdm_spectrum[:k], lam[:k], atol=1e-9)
        assert ent.entropy == pytest.approx(float(-np.sum(lam * np.log(lam))), abs=1e-9)
        assert ent.schmidt_gap == pytest.approx(float(lam[0] - lam[1]), abs=1e-9)
        assert ent.subsystem == (0, cut)


def test_entanglement_truncation_and_order():
    p = _p(1.5, 0.8, N=10)
    cov = ground_covariance(build_realspace(p))
    ent = entanglement_ff(cov, 5, K=8)
    assert len(ent.rdm_spectrum) <= 8
    assert np.all(np.diff(ent.rdm_spectrum) <= 1e-14)
    assert 0.0 < np.sum(ent.rdm_spectrum) <= 1.0 + 1e-12
    # entropy uses every single-particle level, not the truncated list
    full = entanglement_ff(cov, 5, K=64)
    assert ent.entropy == pytest.approx(full.entropy, abs=1e-12)


def test_schmidt_gap_map_matches_pointwise():
    p = _p(0.0, 0.0, N=8)
    g_values = [0.5, 2.0]
    phi_values = [0.1, 1.2]
    grid = schmidt_gap_map(p, g_values, phi_values)
    assert grid.shape == (2, 2)
    for i, phi in enumerate(phi_values):
        for j, g in enumerate(g_values):
            cov = ground_covariance(build_realspace(_p(g, phi, 8)), parity="even")
            assert grid[i, j] == pytest.approx(
                entanglement_ff(cov, 4).schmidt_gap, abs=1e-12
            )


# -- spin correlators ---------------------------------------------------------


@pytest.mark.parametrize("axis,chain,xyz", [
    ("xB", "B", "x"),
    ("yB", "B", "y"),
    ("zB", "B", "z"),
    ("xA", "A", "x"),
    ("yA", "A", "y"),
    ("zA", "A", "z"),
])
def test_correlators_match_oracle(axis, chain, xyz):
    p = _p(1.1, 0.6, N=4)
    rs, H, _ = _fock(p)
    cov = ground_covariance(rs)
    _, psi = ground_state(H)
    op = spin_operator(xyz, chain, 1, p.N) @ spin_operator(xyz, chain, 2, p.N)
    expected = expectation(psi, op)
    assert abs(expected.imag) < 1e-10
    assert spin_correlator_xx(cov, 1, 2, axis) == pytest.approx(
        expected.real, abs=1e-9
    )


def test_correlator_long_range_matches_oracle():
    p = _p(0.8, 0.3, N=5)
    rs, H, _ = _fock(p)
    cov = ground_covariance(rs)
    _, psi = ground_state(H)
    op = spin_operator("x", "B", 1, 5) @ spin_operator("x", "B", 3, 5)
    assert spin_correlator_xx(cov, 1, 3, "xB") == pytest.approx(
        expectation(psi, op).real, abs=1e-9
    )


def test_correlator_validation():
    cov = ground_covariance(build_realspace(_p(1.0, 0.2, N=6)))
    with pytest.raises(ValueError):
        spin_correlator_xx(cov, 3, 3)
    with pytest.raises(ValueError):
        spin_correlator_xx(cov, 4, 2)
    with pytest.warns(BoundaryWarning):
        spin_correlator_xx(cov, 0, 3)
    with pytest.warns(BoundaryWarning):
        spin_correlator_xx(cov, 2, 5)


def test_decoupled_limit_correlators():
    # g = 0, gapped chains: B spins polarized down, x correlations vanish
    cov = ground_covariance(build_realspace(_p(0.0, 0.0, N=8)))
    assert spin_correlator_xx(cov, 2, 5, "zB") == pytest.approx(0.25, abs=1e-10)
    assert spin_correlator_xx(cov, 2, 5, "xB") == pytest.approx(0.0, abs=1e-10)
    assert spin_correlator_xx(cov, 2, 5, "zA") == pytest.approx(0.25, abs=1e-10)


# -- chirality and order parameter --------------------------------------------


@pytest.mark.parametrize("chain", ["A", "B"])
def test_chirality_matches_oracle(chain):
    p = _p(1.1, 0.6, N=4)
    rs, H, _ = _fock(p)
    cov = ground_covariance(rs)
    _, psi = ground_state(H)
    n = p.N // 2 - 1
    op = (
        spin_operator("x", chain, n, 4) @ spin_operator("y", chain, n + 1, 4)
        - spin_operator("y", chain, n, 4) @ spin_operator("x", chain, n + 1, 4)
    )
    expected = expectation(psi, op)
    assert abs(expected.imag) < 1e-10
    assert chirality_ff(cov, chain) == pytest.approx(expected.real, abs=1e-9)


def test_chirality_vanishes_at_symmetric_angles():
    # time reversal at phi = 0; combined with chain-B spin flip at phi = pi/2
    for phi in (0.0, math.pi / 2):
        cov = ground_covariance(build_realspace(_p(1.5, phi, N=32)), parity="even")
        assert abs(chirality_ff(cov, "A")) < 1e-10
        assert abs(chirality_ff(cov, "B")) < 1e-10


def test_chirality_interior_value():
    cov = ground_covariance(build_realspace(_p(1.0, math.pi / 4, N=64)), parity="even")
    ka = chirality_ff(cov, "A")
    kb = chirality_ff(cov, "B")
    assert ka == pytest.approx(0.0311, abs=2e-3)
    # opposite signs on the two chains, equal magnitude up to edge effects
    assert kb == pytest.approx(-ka, abs=1e-4)


def test_chirality_bond_argument():
    cov = ground_covariance(build_realspace(_p(1.0, 0.5, N=8)))
    assert chirality_ff(cov, "B", n=3) == pytest.approx(chirality_ff(cov, "B"))
    with pytest.raises(ValueError):
        chirality_ff(cov, "B", n=7)
    with pytest.raises(ValueError):
        chirality_ff(cov, "C")


def test_order_parameter_phases():
    # long-range stripe order deep in the broken phase, none in the trivial one
    ordered = order_parameter_ff(_p(2.0, math.pi / 2, 64), chain="B")
    trivial = order_parameter_ff(_p(0.2, math.pi / 2, 64), chain="B")
    assert ordered > 0.4
    assert trivial < 0.05
    with pytest.raises(ValueError):
        order_parameter_ff(_p(1.0, 0.3, 10))
