import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import BETA, random_density
from hybridcorr import correlations as corr
from hybridcorr.correlations import (
    DiscordOptimizerConfig,
    binary_entropy,
    correlation_report,
    entropic_discord_digitalized,
    entropic_discord_numeric,
    geometric_discord,
    geometric_discord_asymptote,
    geometric_discord_bruteforce,
    negativity,
    negativity_asymptote,
    negativity_witness_bound,
    s_matrix,
)
from hybridcorr.digitalize import digitalized_target
from hybridcorr.hybrid import HybridState, QubitParams, build_resource_state, rotate_qubit_phase
from hybridcorr.linalg import entropy, partial_trace
from hybridcorr.oscillator import OscillatorState, purity, thermal_state, vacuum

FAST_DZ = DiscordOptimizerConfig(n_theta=12, n_phi=24)


def dz_bruteforce(mat, n_theta=37, n_phi=72):
    """Direct mutual-information gap on a dense angle grid (two-qubit oracle)."""
    rho = np.asarray(mat)
    d = rho.shape[0] // 2
    rho_b = partial_trace(rho, 2, "b")
    s_b = entropy(rho_b)
    i_total = entropy(partial_trace(rho, 2, "a")) + s_b - entropy(rho)
    best = np.inf
    for th in np.linspace(0, np.pi, n_theta):
        for ph in np.linspace(0, 2 * np.pi, n_phi, endpoint=False):
            k0 = np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
            k1 = np.array([-np.exp(-1j * ph) * np.sin(th / 2), np.cos(th / 2)])
            cond = 0.0
            for k in (k0, k1):
                proj = np.kron(k.conj()[None, :], np.eye(d))
                block = proj @ rho @ proj.conj().T
                pk = np.trace(block).real
                if pk > 1e-15:
                    cond += pk * entropy(block / pk)
            # classical correlation from measuring A
            j = s_b - cond
            best = min(best, i_total - j)
    return best


# ------------------------------------------------------------------ negativity


@pytest.mark.parametrize("r, expected", [(0.0, 0.0), (0.3, 0.6), (0.5, 1.0)])
def test_negativity_vacuum_beta4(vac200, r, expected):
    rho = build_resource_state(QubitParams(0.5, r), vac200, BETA)
    assert_allclose(negativity(rho), expected, atol=1e-3)


@pytest.mark.parametrize("r, expected", [(0.5, 1.0), (0.0, 0.0), (0.25, 0.5), (0.2j, 0.4)])
def test_negativity_asymptote(r, expected):
    assert_allclose(negativity_asymptote(QubitParams(0.5, r)), expected, atol=1e-15)


def test_negativity_zero_for_uncorrelated_qubit():
    rho = build_resource_state(QubitParams(0.2, 0.0), thermal_state(1.0, 60), 1.3)
    assert negativity(rho) == pytest.approx(0.0, abs=1e-12)


def test_negativity_converges_monotonically_in_beta(vac200):
    gaps = [abs(negativity(build_resource_state(QubitParams(0.5, 0.5), vac200, b)) - 1.0) for b in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_witness_bound_tight_at_maximal_point(bell_like):
    assert negativity_witness_bound(bell_like) >= 0.99


def test_witness_bound_zero_for_r_zero(vac200):
    rho = build_resource_state(QubitParams(0.5, 0.0), vac200, BETA)
    assert negativity_witness_bound(rho) == 0.0


@given(p=st.floats(0.05, 0.95), frac=st.floats(0.0, 1.0), arg=st.floats(-3.0, 3.0),
       beta=st.floats(0.2, 2.0), nbar=st.floats(0.0, 1.0))
def test_witness_never_exceeds_negativity(p, frac, arg, beta, nbar):
    q = QubitParams.polar(p, frac * math.sqrt(p * (1 - p)), arg)
    rho = build_resource_state(q, thermal_state(nbar, 60, trace_tol=1e-5), beta, trace_tol=1e-5)
    assert negativity_witness_bound(rho) <= negativity(rho) + 1e-9


# ---------------------------------------------------------- geometric discord


def test_s_matrix_limit(bell_like, thermal_half):
    # large-beta limit diag(2|r|^2, 2|r|^2, p^2 + (1-p)^2) * mu, from tr[(ee - gg)^2] with disjoint branches
    assert_allclose(s_matrix(bell_like), np.diag([0.5, 0.5, 0.5]), atol=1e-9)
    rho = build_resource_state(QubitParams(0.5, 0.5), thermal_half, BETA)
    assert_allclose(s_matrix(rho), np.diag([0.25, 0.25, 0.25]), atol=1e-6)


def test_s_matrix_limit_general_p(thermal_half):
    p, r = 0.3, 0.2 + 0.3j
    rho = build_resource_state(QubitParams(p, r), thermal_half, BETA)
    mu = purity(thermal_half)
    expected = np.diag([2 * abs(r) ** 2, 2 * abs(r) ** 2, p * p + (1 - p) ** 2]) * mu
    assert_allclose(s_matrix(rho), expected, atol=1e-6)
    assert_allclose(geometric_discord(rho), 4 * abs(r) ** 2 * mu, atol=1e-6)


def test_s_matrix_symmetric_psd(bell_like):
    s = s_matrix(bell_like)
    assert_allclose(s, s.T, atol=1e-10)
    assert np.linalg.eigvalsh(s)[0] > -1e-10


def test_geometric_discord_examples(bell_like, vac200):
    assert_allclose(geometric_discord(bell_like), 1.0, atol=1e-3)
    rho0 = build_resource_state(QubitParams(0.5, 0.0), vac200, BETA)
    assert geometric_discord(rho0) == pytest.approx(0.0, abs=1e-9)
    prod = build_resource_state(QubitParams(0.5, 0.5), vacuum(20), 0.0)
    assert geometric_discord(prod) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("r, mu, expected", [(0.5, 1.0, 1.0), (0.0, 0.3, 0.0), (0.5, 0.5, 0.5)])
def test_geometric_discord_asymptote(r, mu, expected):
    assert_allclose(geometric_discord_asymptote(QubitParams(0.5, r), mu), expected)


def test_geometric_discord_half_purity(thermal_half):
    rho = build_resource_state(QubitParams(0.5, 0.5), thermal_half, BETA)
    assert_allclose(geometric_discord(rho), 0.5, atol=5e-3)


def test_geometric_discord_bounded_by_purity(thermal1):
    for r in (0.1, 0.3, 0.5):
        rho = build_resource_state(QubitParams(0.5, r), thermal1, BETA)
        assert geometric_discord(rho) <= purity(thermal1) + 1e-6


def test_bruteforce_bell_state():
    bell = np.zeros((4, 4))
    bell[np.ix_([0, 3], [0, 3])] = 0.5
    assert_allclose(geometric_discord_bruteforce(bell), 1.0, atol=1e-8)
    assert_allclose(geometric_discord(HybridState.from_full(bell)), 1.0, atol=1e-12)


def test_bruteforce_zero_for_classical_quantum(vac200):
    rho = build_resource_state(QubitParams(0.3, 0.0), thermal_state(0.5, 30), 0.5)
    assert geometric_discord_bruteforce(rho) == pytest.approx(0.0, abs=1e-10)


@given(seed=st.integers(0, 10_000), d=st.integers(2, 8))
def test_geometric_discord_matches_bruteforce(seed, d):
    mat = random_density(2 * d, np.random.default_rng(seed))
    assert_allclose(geometric_discord(HybridState.from_full(mat)), geometric_discord_bruteforce(mat), atol=1e-4)


# ------------------------------------------------------------ entropic discord


def test_binary_entropy():
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0


@pytest.mark.parametrize("p, r, expected", [(0.5, 0.5, 1.0), (0.5, 0.0, 0.0), (0.3, 0.0, 0.0), (0.7, 0.0, 0.0)])
def test_dz_digitalized_values(p, r, expected):
    assert entropic_discord_digitalized(QubitParams(p, r)) == pytest.approx(expected, abs=1e-14)


def test_dz_digitalized_pure_boundary_is_entanglement_entropy():
    # |r|^2 = p(1-p): the digitalized state is pure, discord = entropy of entanglement
    p = 0.2
    q = QubitParams(p, math.sqrt(p * (1 - p)))
    assert_allclose(entropic_discord_digitalized(q), binary_entropy(p), atol=1e-12)
    near = QubitParams(p, math.sqrt(p * (1 - p)) * (1 - 1e-9))
    assert_allclose(entropic_discord_digitalized(near), binary_entropy(p), atol=1e-6)


@pytest.mark.parametrize("p, r", [(0.5, 0.25), (0.3, 0.3), (0.8, 0.1j)])
def test_dz_digitalized_matches_dense_grid(p, r):
    q = QubitParams(p, r)
    # the optimal axes (z or the phase direction of r) lie on the 5-degree grid
    assert_allclose(entropic_discord_digitalized(q), dz_bruteforce(digitalized_target(q).mat), atol=1e-9)


def test_dz_numeric_product_state():
    rho = build_resource_state(QubitParams(0.4, 0.2), thermal_state(0.5, 30), 0.0)
    assert entropic_discord_numeric(rho, FAST_DZ).value == pytest.approx(0.0, abs=1e-6)


def test_dz_numeric_maximal_point(bell_like):
    res = entropic_discord_numeric(bell_like)
    assert_allclose(res.value, 1.0, atol=1e-2)
    assert_allclose(np.linalg.norm(res.direction), 1.0, atol=1e-12)


@pytest.mark.parametrize("r", [0.1, 0.3, 0.45])
def test_dz_numeric_dominates_digitalized(thermal_half, r):
    q = QubitParams(0.5, r)
    rho = build_resource_state(q, thermal_half, BETA)
    assert entropic_discord_numeric(rho, FAST_DZ).value >= entropic_discord_digitalized(q) - 1e-3


def test_dz_numeric_against_dense_grid_two_qubits():
    mat = random_density(4, np.random.default_rng(11))
    # grid minimum is an upper bound with O(h^2) error
    val, grid = entropic_discord_numeric(mat).value, dz_bruteforce(mat, 91, 180)
    assert val <= grid + 1e-9
    assert grid - val < 1e-3


# ----------------------------------------------------------------- aggregation


@pytest.mark.parametrize("r", [0.1, 0.3, 0.5])
def test_report_matches_caption_formulas(vac200, r):
    q = QubitParams(0.5, r)
    rep = correlation_report(build_resource_state(q, vac200, BETA))
    assert_allclose(rep.negativity, 2 * r, atol=1e-3)
    assert_allclose(rep.geometric_discord, 4 * r * r, atol=1e-3)
    assert rep.negativity_asymptote == pytest.approx(2 * r)
    assert rep.geometric_discord_asymptote == pytest.approx(4 * r * r)
    assert rep.dz_digitalized == pytest.approx(entropic_discord_digitalized(q))
    assert rep.dz_numeric is None
    assert 0 <= rep.truncation.containment_margin < 1e-10


def test_report_zero_for_product():
    rep = correlation_report(build_resource_state(QubitParams(0.5, 0.0), vacuum(10), 0.0), dz_numeric=True,
                             optimizer=FAST_DZ)
    assert rep.negativity == 0 and rep.geometric_discord == 0 and rep.dz_digitalized == 0
    assert rep.dz_numeric == pytest.approx(0.0, abs=1e-9)


@given(p=st.floats(0.05, 0.95), frac=st.floats(0.0, 1.0), seed=st.integers(0, 100))
def test_report_invariants(p, frac, seed):
    q = QubitParams(p, frac * math.sqrt(p * (1 - p)))
    osc = OscillatorState(random_density(6, np.random.default_rng(seed), rank=2))
    rho = build_resource_state(q, osc, 0.5, trace_tol=1.0)
    rep = correlation_report(rho)
    for val in (rep.negativity, rep.geometric_discord, rep.dz_digitalized):
        assert val >= -1e-9
    assert rep.negativity <= 1 + 1e-9


@given(theta=st.floats(-np.pi, np.pi))
def test_local_unitary_invariance(theta):
    q = QubitParams(0.4, 0.3 + 0.2j)
    osc = OscillatorState(random_density(6, np.random.default_rng(5), rank=3))
    rho = build_resource_state(q, osc, 0.8, trace_tol=1.0)
    rot = rotate_qubit_phase(rho, theta)
    assert_allclose(negativity(rot), negativity(rho), atol=1e-8)
    assert_allclose(geometric_discord(rot), geometric_discord(rho), atol=1e-8)
    assert_allclose(entropic_discord_numeric(rot, FAST_DZ).value, entropic_discord_numeric(rho, FAST_DZ).value,
                    atol=1e-8)


def test_negative_clamp_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="hybridcorr"):
        assert corr._clamp(-1e-6, "test quantity") == 0.0
    assert "test quantity" in caplog.text
