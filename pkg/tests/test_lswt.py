"""Spin-wave dynamical matrices, instability thresholds and observables."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiralchain import ed
from chiralchain.lswt import (
    build_hopfield,
    instability_threshold,
    lswt_observables,
    magnon_coupling,
    magnon_dispersion,
    para_diagonalize,
    threshold_curve,
)
from chiralchain.params import ModelParams


def _p(g, phi):
    return ModelParams(g=g, phi=phi)


@given(
    g=st.floats(min_value=0.0, max_value=2.0),
    phi=st.floats(min_value=0.0, max_value=math.pi / 2),
    k=st.floats(min_value=-math.pi, max_value=math.pi),
)
def test_dynamical_matrix_pseudo_hermitian(g, phi, k):
    L = build_hopfield(_p(g, phi), k)
    eta = L.metric
    assert np.allclose(eta @ L.L @ eta, L.L.conj().T, atol=1e-12)


def test_decoupled_spectrum():
    p = _p(0.0, 0.0)
    k = 0.9
    modes = para_diagonalize(build_hopfield(p, k))
    assert modes.stable
    Om = magnon_dispersion(p, k)
    assert np.allclose(
        np.sort(modes.eigenvalues.real),
        np.sort([Om, p.omega0, -Om, -p.omega0]),
        atol=1e-12,
    )
    # physical band energies, descending
    assert np.allclose(modes.energies, [Om, p.omega0], atol=1e-12)


@given(
    g=st.floats(min_value=0.0, max_value=0.6),
    phi=st.floats(min_value=0.0, max_value=math.pi / 2),
    k=st.floats(min_value=-math.pi, max_value=math.pi),
)
def test_spectrum_conjugation_across_k(g, phi, k):
    # eta-pseudo-Hermiticity ties the spectra at +-k: spec L(-k) = -conj spec L(k)
    ev_p = np.linalg.eigvals(build_hopfield(_p(g, phi), k).L)
    ev_m = np.linalg.eigvals(build_hopfield(_p(g, phi), -k).L)
    want = -np.conj(ev_p)
    got = list(ev_m)
    for w in want:
        j = int(np.argmin(np.abs(np.array(got) - w)))
        assert abs(got[j] - w) < 1e-8
        got.pop(j)


def test_para_unitarity_of_transformation():
    p = _p(0.5, 0.4)
    modes = para_diagonalize(build_hopfield(p, 0.7))
    assert modes.stable
    T = modes.transformation
    eta = np.diag([1.0, 1.0, -1.0, -1.0])
    assert np.allclose(T @ eta @ T.conj().T, eta, atol=1e-10)
    H = eta @ build_hopfield(p, 0.7).L
    H = 0.5 * (H + H.conj().T)
    D = T.conj().T @ H @ T
    assert np.allclose(D, np.diag(np.diag(D)), atol=1e-9)
    assert np.all(np.diag(D).real > 0.0)
    assert modes.energies[0] >= modes.energies[1] > 0.0


# -- instability threshold ----------------------------------------------------


def test_threshold_closed_form_endpoints():
    # g_thr(k)^2 = omega0 (Omega0 + 2J cos k) / (8 (1 + cos 2phi cos k))
    t0 = instability_threshold(_p(0.1, 0.0))
    assert t0.g_c == pytest.approx(math.sqrt(2.5 * 4.5 / 16.0), rel=1e-9)
    assert abs(t0.k_c) < 1e-6
    t1 = instability_threshold(_p(0.1, math.pi / 2))
    assert t1.g_c == pytest.approx(math.sqrt(2.5 * 0.5 / 16.0), rel=1e-9)
    assert abs(t1.k_c - math.pi) < 1e-6
    t2 = instability_threshold(_p(0.1, math.pi / 4))
    assert t2.g_c == pytest.approx(math.sqrt(2.5 * 0.5 / 8.0), rel=1e-9)
    assert abs(t2.k_c - math.pi) < 1e-6


def test_threshold_momentum_crossover():
    # the soft momentum jumps from 0 to pi where cos 2phi crosses 2J/Omega0
    phi_star = 0.5 * math.acos(2.0 * 1.0 / 2.5)
    below = instability_threshold(_p(0.1, phi_star - 0.02))
    above = instability_threshold(_p(0.1, phi_star + 0.02))
    assert abs(below.k_c) < 1e-6
    assert abs(above.k_c - math.pi) < 1e-6
    # at the crossover the threshold curve is flat in k: every endpoint ties
    flat = instability_threshold(_p(0.1, phi_star))
    gs = [g for _, g in flat.candidates]
    assert len(flat.candidates) >= 2
    assert max(gs) - min(gs) < 1e-3 * flat.g_c


def test_threshold_candidates_sorted():
    t = instability_threshold(_p(0.1, 0.3))
    gs = [g for _, g in t.candidates]
    assert gs == sorted(gs)
    assert t.candidates[0][1] == pytest.approx(t.g_c)


def test_threshold_curve_matches_brute_force():
    p = _p(0.1, 0.45)
    for k in (0.0, 1.0, 2.5, math.pi):
        g_thr = float(threshold_curve(p, p.phi, k))
        lo = para_diagonalize(build_hopfield(dataclasses.replace(p, g=0.995 * g_thr), k))
        hi = para_diagonalize(build_hopfield(dataclasses.replace(p, g=1.005 * g_thr), k))
        assert lo.stable
        assert not hi.stable


def test_stability_flip_at_threshold():
    t = instability_threshold(_p(0.1, 0.0))
    below = para_diagonalize(build_hopfield(_p(t.g_c - 1e-3, 0.0), t.k_c))
    above = para_diagonalize(build_hopfield(_p(t.g_c + 1e-3, 0.0), t.k_c))
    assert below.stable
    assert below.energies is not None
    assert not above.stable
    assert above.energies is None
    assert np.max(np.abs(above.eigenvalues.imag)) > 1e-4


def test_threshold_rejects_bad_angle():
    with pytest.raises(ValueError):
        instability_threshold(_p(0.1, 0.0), phi=-0.2)


# -- observables ---------------------------------------------------------------


def test_observables_reference_curve():
    obs = lswt_observables(ModelParams(phi=0.0), [0.2, 0.5, 0.75], n_k=512)
    assert np.allclose(obs["g"], [0.2, 0.5, 0.75])
    assert np.allclose(
        obs["magnetization"], [-0.49738013, -0.47780725, -0.39072629], atol=1e-6
    )
    assert np.allclose(
        obs["gs_energy"], [-0.00702146, -0.04848749, -0.13772464], atol=1e-6
    )
    # quantum corrections grow with the coupling
    assert np.all(np.diff(obs["magnetization"]) > 0.0)
    assert np.all(np.diff(obs["gs_energy"]) < 0.0)


def test_observables_vanish_at_zero_coupling():
    obs = lswt_observables(ModelParams(phi=0.3), [0.0], n_k=256)
    assert obs["magnetization"][0] == pytest.approx(-0.5, abs=1e-12)
    assert obs["gs_energy"][0] == pytest.approx(0.0, abs=1e-12)


def test_observables_domain_error_at_threshold():
    p = ModelParams(phi=0.0)
    t = instability_threshold(p)
    with pytest.raises(ValueError, match="threshold"):
        lswt_observables(p, [0.5 * t.g_c, 1.1 * t.g_c])
    with pytest.raises(ValueError, match="threshold"):
        lswt_observables(p, [t.g_c])


# -- cross-check against exact diagonalization ----------------------------------


def test_single_magnon_band_approaches_ed():
    # PBC ring: the lowest odd-sector excitation is a single magnon; the
    # spin-wave band reproduces it up to O(g^2) pairing corrections
    diffs = []
    for g in (0.1, 0.2):
        p = ModelParams(g=g, phi=0.3, N=5, boundary="periodic")
        delta0 = ed.gaps(p)["delta0"]
        ks = 2.0 * np.pi * np.arange(5) / 5.0
        band = min(
            para_diagonalize(build_hopfield(p, float(k))).energies[1] for k in ks
        )
        diffs.append(abs(delta0 - band))
    assert diffs[0] < 0.01
    assert diffs[1] / diffs[0] == pytest.approx(4.0, abs=0.4)


def test_magnon_coupling_zeros():
    # the chiral form factor kills the k = pi coupling at phi = 0 and the
    # k = 0 coupling at phi = pi/2
    assert abs(magnon_coupling(_p(1.0, 0.0), math.pi)) < 1e-12
    assert abs(magnon_coupling(_p(1.0, math.pi / 2), 0.0)) < 1e-12
