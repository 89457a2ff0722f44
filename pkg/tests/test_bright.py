import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pbbsim.bright import (
    ansatz_curves,
    ansatz_eigenvalues,
    ansatz_mutual_information,
    ansatz_pseudospin,
    ansatz_state,
    build,
    series_eigenvalues,
)
from pbbsim.model import expectations, qubit_density_matrix
from pbbsim.telegraph import mutual_information, pseudospin, pseudospin_from_density_matrix


def test_vacuum():
    a = build(0.0)
    assert a.c0_sq == 1.0 and a.weight == 1.0
    assert ansatz_pseudospin(a) == 1.0
    assert ansatz_mutual_information(a) == 0.0


def test_poisson_amplitudes():
    a = build(4.0, m_max=40)
    assert abs(a.weight - 1) < 1e-12
    m = np.arange(41)
    expected = np.array([math.exp(-4) * 4.0**k / math.factorial(k) for k in m])
    np.testing.assert_allclose(a.c**2, expected, rtol=1e-12, atol=1e-300)


def test_large_photon_number():
    a = build(200.0)
    assert a.c[0] < 1e-40
    assert a.coherence > 0.999
    assert abs(a.weight - 1) < 1e-12
    with pytest.raises(ValueError):
        build(-1.0)


@given(st.floats(0.0, 300.0))
def test_closed_form_matches_explicit_state(n):
    a = build(n)
    state = ansatz_state(a)
    state.normalize()
    obs = expectations(state)
    assert abs(obs.sigma_z_mean + a.c0_sq) < 1e-12
    assert abs(2 * obs.sigma_mean - a.coherence) < 1e-12
    assert abs(obs.n_mean - (n - (1 - a.c0_sq) / 2)) < 1e-9 * max(1, n)
    rho = qubit_density_matrix(state)
    assert abs(pseudospin_from_density_matrix(rho) - ansatz_pseudospin(a)) < 1e-12
    assert abs(pseudospin(obs.sigma_mean, obs.sigma_z_mean) - ansatz_pseudospin(a)) < 1e-12
    lam = np.sort(np.linalg.eigvalsh(rho))[::-1]
    np.testing.assert_allclose(lam, ansatz_eigenvalues(a), atol=1e-12)
    assert abs(mutual_information(state) - ansatz_mutual_information(a)) < 1e-9


@given(st.floats(0.0, 300.0))
def test_eigenvalue_sums(n):
    a = build(n)
    assert abs(sum(ansatz_eigenvalues(a)) - 1) < 1e-15
    assert abs(sum(series_eigenvalues(a)) - (1 - a.c0_sq / 2)) < 1e-12
    assert ansatz_pseudospin(a) <= 1 + 1e-12


def test_series_eigenvalues_differ_at_small_n():
    a = build(1.0)
    exact = ansatz_eigenvalues(a)
    series = series_eigenvalues(a)
    assert abs(exact[0] - series[0]) > 0.05
    b = build(200.0)
    np.testing.assert_allclose(series_eigenvalues(b), ansatz_eigenvalues(b), atol=1e-3)


def test_coherence_differs_from_plain_overlap_only_at_small_n():
    assert build(1.0).coherence - build(1.0).ladder_overlap > 0.1
    assert abs(build(100.0).coherence - build(100.0).ladder_overlap) < 1e-20


def test_limits_and_trends():
    grid = np.linspace(10, 300, 80)
    rows = ansatz_curves(grid)
    S = np.array([r[1] for r in rows])
    mi = np.array([r[2] for r in rows])
    assert np.all(np.diff(S) > 0)
    assert np.all(np.diff(mi) < 0)
    big = build(1e4)
    assert abs(big.c0_sq) < 1e-300
    assert ansatz_pseudospin(big) > 0.9999
    assert ansatz_mutual_information(big) < 0.01


def test_curves_validate_grid():
    with pytest.raises(ValueError):
        ansatz_curves([3.0, 1.0])
    with pytest.raises(ValueError):
        ansatz_curves([0.0, 1.0])
    with pytest.raises(ValueError):
        ansatz_state(build(10.0), n_max=5)
