import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import expm

from conftest import random_density
from hybridcorr.oscillator import (
    OscillatorState,
    TruncationError,
    char_fn,
    coherent_state,
    displacement_matrix,
    eigen_cutoff_for_tail,
    fock_state,
    purity,
    recommended_dim,
    spectral_tail,
    thermal_deficit,
    thermal_state,
    truncation_report,
    vacuum,
)
from hybridcorr.linalg import NumericalToleranceError


def _generator(beta, dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    return beta * a.conj().T - np.conj(beta) * a


# ---------------------------------------------------------------- states


def test_thermal_zero_is_vacuum():
    assert_allclose(thermal_state(0.0, 10).mat, vacuum(10).mat, atol=0)


def test_thermal_nbar_one_populations():
    st_ = thermal_state(1.0, 60)
    assert_allclose(np.diag(st_.mat).real[:5], [1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32], rtol=1e-14)


@pytest.mark.parametrize("nbar, mu", [(0.5, 0.5), (4.5, 0.1)])
def test_thermal_purity_matches_caption_values(nbar, mu):
    # geometric-sum oracle: sum s_n^2 = 1/(2 nbar + 1)
    assert_allclose(purity(thermal_state(nbar, 400)), mu, atol=1e-12)


@given(nbar=st.floats(0.01, 5.0), dim=st.integers(20, 200))
def test_thermal_trace_deficit_is_geometric_tail(nbar, dim):
    q = nbar / (1 + nbar)
    if q**dim > 1e-6:
        with pytest.raises(TruncationError) as err:
            thermal_state(nbar, dim)
        assert_allclose(err.value.deficit, q**dim, rtol=1e-10)
        return
    st_ = thermal_state(nbar, dim)
    assert_allclose(1 - st_.trace, q**dim, rtol=1e-6, atol=1e-15)
    assert_allclose(thermal_deficit(nbar, dim), q**dim, rtol=1e-12)


def test_thermal_purity_increases_with_dim():
    mus = [purity(thermal_state(2.0, d, trace_tol=1.0)) for d in (5, 10, 20, 40, 80)]
    assert np.all(np.diff(mus) > 0)
    assert_allclose(mus[-1], 1 / 5, rtol=1e-10)


def test_invalid_states_rejected():
    with pytest.raises(NumericalToleranceError):
        OscillatorState(np.diag([0.5, 0.6]))
    with pytest.raises(NumericalToleranceError):
        OscillatorState(np.array([[1.0, 0.1j], [0.1j, 0.0]]))
    with pytest.raises(NumericalToleranceError):
        OscillatorState(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        thermal_state(-1.0, 10)
    with pytest.raises(ValueError):
        vacuum(1)


def test_spectrum_of_diagonal_state_is_fock_basis():
    lam, vecs = thermal_state(1.0, 40).spectrum
    assert np.all(np.diff(lam) <= 0)
    assert_allclose(vecs, np.eye(40), atol=0)


def test_spectrum_ties_broken_by_fock_index():
    mat = np.diag([0.25, 0.25, 0.25, 0.25])
    _, vecs = OscillatorState(mat).spectrum
    assert_allclose(vecs, np.eye(4))


# ---------------------------------------------------------- displacement


def test_displacement_zero_is_identity():
    assert_allclose(displacement_matrix(0.0, 12), np.eye(12), atol=0)


def test_displaced_vacuum_overlap():
    assert_allclose(abs(displacement_matrix(1.0, 30)[0, 0]), math.exp(-0.5), rtol=1e-14)


@pytest.mark.parametrize("beta", [0.3, 1.0 - 0.5j, 2.0j])
def test_displacement_matches_matrix_exponential(beta):
    # expm on a much larger truncation is exact on the low block up to tail leakage
    big = expm(_generator(beta, 160))
    assert_allclose(displacement_matrix(beta, 30), big[:30, :30], atol=1e-11)


@pytest.mark.parametrize("beta", [4.0, 6.0 + 2.0j])
def test_displacement_column_zero_is_coherent_state(beta):
    m = np.arange(60)
    log_amp = m * np.log(abs(beta)) - abs(beta) ** 2 / 2 - 0.5 * np.array([math.lgamma(k + 1) for k in m])
    expected = np.exp(log_amp) * np.exp(1j * m * np.angle(beta))
    assert_allclose(displacement_matrix(beta, 60)[:, 0], expected, rtol=1e-12, atol=1e-300)
    assert_allclose(coherent_state(beta, 60), expected, rtol=1e-12, atol=1e-300)


def test_displacement_high_precision_entries():
    # exact <m|D(beta)|n> from the Laguerre form evaluated in 50-digit arithmetic
    mpmath.mp.dps = 50
    beta = mpmath.mpc(6, 1.5)
    d = displacement_matrix(complex(beta), 300)
    for m, n in [(0, 0), (37, 12), (12, 37), (150, 149), (250, 30)]:
        lo, hi = min(m, n), max(m, n)
        b = beta if m >= n else -mpmath.conj(beta)
        val = (mpmath.sqrt(mpmath.factorial(lo) / mpmath.factorial(hi)) * b ** (hi - lo)
               * mpmath.exp(-abs(beta) ** 2 / 2) * mpmath.laguerre(lo, hi - lo, abs(beta) ** 2))
        assert abs(complex(val) - d[m, n]) <= 1e-13 * max(1.0, abs(complex(val)))


def test_displacement_composition_law():
    b, g = 1.2 + 0.4j, -0.7 + 0.9j
    dim = 120
    lhs = displacement_matrix(b, dim) @ displacement_matrix(g, dim)
    rhs = np.exp((b * np.conj(g) - np.conj(b) * g) / 2) * displacement_matrix(b + g, dim)
    half = dim // 2
    assert_allclose(lhs[:half, :half], rhs[:half, :half], atol=1e-8)


def test_displacement_unitary_on_contained_vectors():
    d = displacement_matrix(3.0, 150)
    block = d[:, :20]
    assert_allclose(block.conj().T @ block, np.eye(20), atol=1e-10)


def test_recommended_dim_rule():
    assert recommended_dim(8.0, 1) == 197
    assert recommended_dim(8.0, 35) == 231


# ------------------------------------------------------ phase-space data


def test_purity_values():
    assert purity(vacuum(5)) == pytest.approx(1.0)
    assert purity(thermal_state(4.5, 400)) == pytest.approx(0.1, abs=1e-12)


def test_char_fn_at_origin_and_vacuum():
    assert_allclose(char_fn(thermal_state(1.0, 80), 0.0), 1.0, atol=1e-12)
    for alpha in [0.5, 1 + 1j, -2.0j]:
        assert_allclose(char_fn(vacuum(80), alpha), math.exp(-abs(alpha) ** 2 / 2), atol=1e-14)


def test_char_fn_thermal_decay():
    st_ = thermal_state(1.0, 200)
    val = char_fn(st_, 6.0)
    # analytic thermal value exp(-(nbar + 1/2)|alpha|^2)
    assert abs(val) < 1e-6
    assert_allclose(char_fn(st_, 1.0), math.exp(-1.5), rtol=1e-8)


def test_purity_identity_by_polar_quadrature():
    # pi^-1 int d^2 alpha |chi(alpha)|^2 = tr rho^2; Gauss-Legendre in radius, uniform in angle
    rng = np.random.default_rng(3)
    st_ = OscillatorState(random_density(6, rng))
    rad, w = np.polynomial.legendre.leggauss(60)
    r_max = 9.0
    radii, wr = 0.5 * r_max * (rad + 1), 0.5 * r_max * w
    angles = 2 * np.pi * np.arange(24) / 24
    total = 0.0
    for r, wgt in zip(radii, wr):
        ring = np.mean([abs(char_fn(st_, r * np.exp(1j * a))) ** 2 for a in angles])
        total += wgt * r * 2 * np.pi * ring
    assert_allclose(total / np.pi, purity(st_), atol=1e-3)


# ------------------------------------------------------------ truncation


def test_truncation_report_vacuum():
    rep = truncation_report(vacuum(40))
    assert rep.trace_deficit == 0 and rep.containment_margin < 1e-15 and rep.tail_eps == 0


def test_truncation_tail_thermal():
    st_ = thermal_state(1.0, 100)
    rep = truncation_report(st_, kraus_cutoff=20)
    assert_allclose(rep.tail_eps, 0.5**21, rtol=1e-8)
    assert_allclose(spectral_tail(st_, 20), 0.5**21, rtol=1e-8)
    assert eigen_cutoff_for_tail(st_, 1e-4) == 13


def test_truncation_flags_poor_containment():
    rep = truncation_report(vacuum(80), [8.0])
    assert rep.containment_margin > 0.1
    ok = truncation_report(vacuum(200), [8.0])
    assert ok.containment_margin < 1e-10


@given(n=st.integers(0, 9))
def test_fock_state_valid(n):
    st_ = fock_state(n, 10)
    assert purity(st_) == pytest.approx(1.0)
    assert st_.mat[n, n] == 1
