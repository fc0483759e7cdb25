"""Shared fixtures: seeded generators, random matrices and small scenarios."""

import numpy as np
import pytest

from drt.model import RngStream, Scenario


def random_complex(gen, shape):
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


def random_pd(gen, n, floor=0.1):
    """Random Hermitian positive definite matrix with eigenvalues >= floor."""
    A = random_complex(gen, (n, n))
    return A @ A.conj().T / n + floor * np.eye(n)


def random_psd_trace(gen, n, P):
    """Random PSD matrix with trace P."""
    A = random_complex(gen, (n, n))
    R = A @ A.conj().T
    return R * (P / np.trace(R).real)


@pytest.fixture
def gen():
    return np.random.default_rng(20240611)


@pytest.fixture
def rng():
    return RngStream(7)


@pytest.fixture
def scalar_scenario():
    return Scenario(
        M=1, N_s=1, N_c=1, T=1, P_T=1.0, sigma_s2=1.0, sigma_c2=1.0,
        R_h=np.eye(1), H_c=np.ones((1, 1)),
    )


@pytest.fixture
def trm_scenario():
    return Scenario(
        M=2, N_s=2, N_c=2, T=4, P_T=1.0, sigma_s2=1.0, sigma_c2=0.01,
        R_h=np.eye(4), comm_samples=50,
    )


@pytest.fixture
def worked_scenario():
    """Single sensing antenna with prior spectrum (1, 0.25)."""
    return Scenario(
        M=2, N_s=1, N_c=1, T=1, P_T=1.0, sigma_s2=1.0, sigma_c2=1.0,
        R_h=np.diag([1.0, 0.25]),
    )


@pytest.fixture
def kron_scenario():
    A = np.array([[1.0, 0.5], [0.5, 1.0]])
    return Scenario(
        M=2, N_s=2, N_c=1, T=2, P_T=2.0, sigma_s2=0.5, sigma_c2=0.1,
        R_h=np.kron(A, np.eye(2)), comm_samples=40,
    )
