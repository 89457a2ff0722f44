import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("pbbsim", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pbbsim")


def dense_operators(n_max):
    """a, sigma on the qubit x Fock basis via Kronecker products (index q*(n_max+1)+m)."""
    N = n_max + 1
    a_mode = np.diag(np.sqrt(np.arange(1, N)), 1).astype(complex)
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e| with g first
    a = np.kron(np.eye(2), a_mode)
    sigma = np.kron(lower, np.eye(N))
    return a, sigma


def dense_hamiltonian(params, n_max):
    a, s = dense_operators(n_max)
    ad, sd = a.conj().T, s.conj().T
    p = params
    return (
        -p.delta * (ad @ a + sd @ s)
        + 1j * p.g * (ad @ s - a @ sd)
        + 1j * p.eta * (ad - a)
    )


def random_state(rng, n_max, empty_top=0):
    amps = rng.normal(size=(2, n_max + 1)) + 1j * rng.normal(size=(2, n_max + 1))
    if empty_top:
        amps[:, -empty_top:] = 0
    return amps / np.linalg.norm(amps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
