import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_complex, random_pd, random_psd_trace
from drt.errors import DomainError
from drt.numkit import (
    check_hermitian,
    check_psd,
    commutation_matrix,
    hermitian_eig,
    kron,
    logdet_pd,
    numerical_rank,
    project_psd_trace,
    project_trace_simplex,
    psd_sqrt,
    unvec,
    vec,
)


def test_vec_stacks_columns():
    A = np.array([[1, 2, 3], [4, 5, 6]])
    assert vec(A).tolist() == [1, 4, 2, 5, 3, 6]
    assert_allclose(unvec(vec(A), 2, 3), A)


@pytest.mark.parametrize("m, n", [(1, 1), (2, 3), (3, 2), (4, 4)])
def test_commutation_matrix_transposes(gen, m, n):
    A = random_complex(gen, (m, n))
    K = commutation_matrix(m, n)
    assert_allclose(K @ vec(A), vec(A.T))
    assert_allclose(K @ K.T, np.eye(m * n))


def test_commutation_matrix_swaps_kronecker_factors(gen):
    m, n = 2, 3
    B = random_complex(gen, (n, n))
    C = random_complex(gen, (m, m))
    K = commutation_matrix(m, n)
    assert_allclose(K @ np.kron(B, C) @ K.T, np.kron(C, B), atol=1e-12)


def test_kron_acts_on_vectorized_matrix(gen):
    A = random_complex(gen, (3, 2))
    B = random_complex(gen, (4, 5))
    X = random_complex(gen, (5, 2))
    assert_allclose(vec(B @ X @ A.T), kron(A, B) @ vec(X))
    assert kron(2.0, np.eye(2)).shape == (2, 2)


def test_commutation_matrix_rejects_empty_dimension():
    with pytest.raises(DomainError):
        commutation_matrix(0, 2)


def test_hermitian_eig_descending_and_reconstructs(gen):
    H = random_pd(gen, 4)
    eig = hermitian_eig(H)
    assert np.all(np.diff(eig.lambdas) <= 0)
    assert_allclose(eig.reconstruct(), H, atol=1e-12)
    assert_allclose(eig.U.conj().T @ eig.U, np.eye(4), atol=1e-12)


def test_check_hermitian_rejects_bad_input():
    with pytest.raises(DomainError):
        check_hermitian(np.ones((2, 3)))
    with pytest.raises(DomainError):
        check_hermitian(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_check_psd_clips_round_off_only():
    check_psd(np.diag([1.0, -1e-15]))
    with pytest.raises(DomainError):
        check_psd(np.diag([1.0, -1e-3]))


def test_psd_sqrt_squares_back(gen):
    R = random_psd_trace(gen, 3, 2.0)
    root = psd_sqrt(R)
    assert_allclose(root @ root, R, atol=1e-12)


def test_logdet_pd_in_bits():
    assert logdet_pd(np.diag([2.0, 4.0])) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        logdet_pd(np.diag([1.0, 0.0]))


def test_numerical_rank():
    assert numerical_rank(np.zeros((3, 3))) == 0
    v = np.array([[1.0], [2.0], [3.0]])
    assert numerical_rank(v @ v.T) == 1
    assert numerical_rank(np.eye(3)) == 3
    with pytest.raises(DomainError):
        numerical_rank(np.eye(2), rtol=1.5)


def test_project_trace_simplex_cases():
    assert_allclose(project_trace_simplex([3.0, 1.0, 0.0], 1.0), [1.0, 0.0, 0.0])
    assert_allclose(project_trace_simplex([0.5, 0.5], 2.0), [1.0, 1.0])
    assert_allclose(project_trace_simplex([0.2, -0.3], 0.0), [0.0, 0.0])
    with pytest.raises(DomainError):
        project_trace_simplex([1.0], -1.0)


def test_project_psd_trace_feasible_and_idempotent(gen):
    A = random_complex(gen, (3, 3))
    projected = project_psd_trace(A + A.conj().T, 2.5)
    assert np.trace(projected).real == pytest.approx(2.5)
    assert np.linalg.eigvalsh(projected).min() >= -1e-12
    assert_allclose(project_psd_trace(projected, 2.5), projected, atol=1e-12)
