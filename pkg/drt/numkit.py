"""
Dense complex linear-algebra primitives used by every other module of the
package: column-major vectorization, Kronecker products, the commutation
matrix, Hermitian eigendecompositions, log-determinants, numerical rank and
the projection onto trace-constrained PSD matrices.

Conventions:
    - `vec` stacks columns (Fortran order) everywhere.
    - Eigenvalues are sorted in descending order everywhere.
    - Log-determinants are returned in bits; `logdet_pd_nats` is the single
      natural-log entry point other modules convert from.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from helpers.config import HERMITIAN_RTOL, PD_RTOL, PSD_CLIP_RTOL, RANK_RTOL

from .errors import DomainError, NumericFailure

ComplexMatrix = npt.NDArray[np.complex128]
HermitianMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]

LOG2E = 1.0 / np.log(2.0)  # nats -> bits


@dataclass(frozen=True)
class EigDecomposition:
    """
    Eigendecomposition H = U diag(lambdas) U^H of a Hermitian matrix.

    Attributes:
        U (ndarray): Unitary matrix whose columns are the eigenvectors.
        lambdas (ndarray): Real eigenvalues sorted in descending order.
    """

    U: ComplexMatrix
    lambdas: RealVector

    def reconstruct(self):
        """Return U diag(lambdas) U^H."""
        return (self.U * self.lambdas) @ self.U.conj().T


def vec(A):
    """Column-stacked vector of a matrix (a vector is returned unchanged)."""
    return np.asarray(A).reshape(-1, order="F")


def unvec(v, rows, cols):
    """Inverse of `vec` for a `rows` x `cols` matrix."""
    return np.asarray(v).reshape((rows, cols), order="F")


def kron(A, B):
    """Standard Kronecker product A ⊗ B."""
    return np.kron(np.atleast_2d(A), np.atleast_2d(B))


def commutation_matrix(m, n):
    """
    Build the permutation K with K·vec(A) = vec(A^T) for every m x n matrix A.

    The construction follows the defining property: entry A[i, j] sits at
    position i + m*j of vec(A) and at position j + n*i of vec(A^T).
    Consequently K (B ⊗ C) K^T = C ⊗ B for B n x n and C m x m.

    Args:
        m (int): Number of rows of A.
        n (int): Number of columns of A.

    Returns:
        ndarray: The real 0/1 permutation matrix of dimension m*n.
    """
    if m < 1 or n < 1:
        raise DomainError(f"commutation matrix needs m, n >= 1, got {m}, {n}")

    rows = np.arange(m)[:, None]
    cols = np.arange(n)[None, :]
    source = (rows + m * cols).ravel()
    target = (cols + n * rows).ravel()

    K = np.zeros((m * n, m * n))
    K[target, source] = 1.0
    return K


def hermitian_part(H):
    """Return (H + H^H) / 2."""
    H = np.asarray(H)
    return 0.5 * (H + H.conj().swapaxes(-1, -2))


def check_hermitian(H, name="matrix"):
    """
    Validate that `H` is a square Hermitian matrix and return its Hermitian
    part (which removes round-off asymmetry).

    Raises:
        DomainError: If `H` is not square or not Hermitian within tolerance.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"{name} must be square, got shape {H.shape}")

    scale = max(np.abs(H).max(initial=0.0), 1.0)
    if np.abs(H - H.conj().T).max(initial=0.0) > HERMITIAN_RTOL * scale:
        raise DomainError(f"{name} is not Hermitian")

    return hermitian_part(H)


def hermitian_eig(H):
    """
    Eigendecomposition of a Hermitian matrix with descending eigenvalues.

    Args:
        H (ndarray): Hermitian matrix.

    Returns:
        EigDecomposition: Unitary eigenvectors and descending eigenvalues.

    Raises:
        DomainError: If `H` is not Hermitian.
        NumericFailure: If the eigensolver does not converge.
    """
    H = check_hermitian(H)
    try:
        lambdas, U = scipy.linalg.eigh(H)
    except (np.linalg.LinAlgError, ValueError) as eig_err:
        raise NumericFailure(f"eigendecomposition failed: {eig_err}") from eig_err

    return EigDecomposition(U=U[:, ::-1], lambdas=lambdas[::-1].copy())


def eigvalsh_desc(H):
    """Descending eigenvalues of a Hermitian matrix (no validation)."""
    return np.linalg.eigvalsh(hermitian_part(H))[..., ::-1]


def check_psd(R, name="matrix"):
    """
    Validate a PSD matrix and return its Hermitian part.

    Eigenvalues down to -PSD_CLIP_RTOL * max(1, largest) are treated as
    round-off.

    Raises:
        DomainError: If `R` is not Hermitian or has a genuinely negative
                     eigenvalue.
    """
    R = check_hermitian(R, name)
    lambdas = eigvalsh_desc(R)
    floor = -PSD_CLIP_RTOL * max(1.0, abs(lambdas[0]) if lambdas.size else 0.0)
    if lambdas.size and lambdas[-1] < floor:
        raise DomainError(
            f"{name} is not positive semidefinite "
            f"(smallest eigenvalue {lambdas[-1]:.3e})"
        )
    return R


def psd_sqrt(R, name="matrix"):
    """
    Hermitian square root of a PSD matrix via its eigendecomposition.

    Negative eigenvalues within round-off of zero are clipped to zero.

    Raises:
        DomainError: If `R` is indefinite beyond round-off.
    """
    eig = hermitian_eig(check_psd(R, name))
    roots = np.sqrt(np.clip(eig.lambdas, 0.0, None))
    return (eig.U * roots) @ eig.U.conj().T


def logdet_pd_nats(H):
    """
    Natural-log determinant of a Hermitian positive definite matrix.

    Raises:
        DomainError: If the smallest eigenvalue is not above
                     PD_RTOL times the largest.
    """
    lambdas = eigvalsh_desc(check_hermitian(H))
    if lambdas.size == 0:
        return 0.0
    if lambdas[0] <= 0.0 or lambdas[-1] <= PD_RTOL * lambdas[0]:
        raise DomainError("matrix is not positive definite")
    return float(np.sum(np.log(lambdas)))


def logdet_pd(H):
    """Base-2 log-determinant of a Hermitian positive definite matrix."""
    return logdet_pd_nats(H) * LOG2E


def logdet_pd_batch_nats(H):
    """
    Natural-log determinants of a stack of Hermitian PD matrices.

    Used on Monte Carlo blocks where every matrix has the form I + PSD, so
    positivity holds by construction and no per-matrix validation is done.
    """
    sign, logabs = np.linalg.slogdet(hermitian_part(H))
    if np.any(sign.real <= 0.0):
        raise NumericFailure("non-positive determinant in a PD batch")
    return logabs


def numerical_rank(A, rtol=RANK_RTOL):
    """
    Count the singular values above `rtol` times the largest one.

    Args:
        A (ndarray): Any matrix.
        rtol (float): Relative threshold in (0, 1).

    Returns:
        int: Numerical rank; 0 for the zero matrix.
    """
    if not 0.0 < rtol < 1.0:
        raise DomainError(f"rtol must lie in (0, 1), got {rtol}")

    A = np.atleast_2d(np.asarray(A))
    if A.size == 0:
        return 0

    singular_values = np.linalg.svd(A, compute_uv=False)
    if singular_values[0] == 0.0:
        return 0
    return int(np.count_nonzero(singular_values > rtol * singular_values[0]))


def project_trace_simplex(lambdas, P):
    """
    Euclidean projection of a real sequence onto {x >= 0, sum(x) = P}.

    Args:
        lambdas (array_like): Real values to project.
        P (float): Nonnegative target sum.

    Returns:
        ndarray: The nearest nonnegative sequence summing to `P`.
    """
    if P < 0.0:
        raise DomainError(f"simplex budget must be nonnegative, got {P}")

    values = np.asarray(lambdas, dtype=float)
    if P == 0.0 or values.size == 0:
        return np.zeros_like(values)

    ordered = np.sort(values)[::-1]
    excess = np.cumsum(ordered) - P
    ranks = np.arange(1, values.size + 1)
    active = np.nonzero(ordered - excess / ranks > 0.0)[0]
    rho = active[-1]
    threshold = excess[rho] / (rho + 1)
    projected = np.maximum(values - threshold, 0.0)

    # Put the round-off of the sum back on the largest entry.
    projected[np.argmax(projected)] += P - projected.sum()
    return projected


def project_psd_trace(A, P):
    """
    Frobenius projection of a Hermitian matrix onto {R ⪰ 0, tr R = P}.

    The eigenvalues are projected onto the simplex and the matrix is
    reassembled on the original eigenvectors.
    """
    eig = hermitian_eig(A)
    projected = project_trace_simplex(eig.lambdas, P)
    return hermitian_part((eig.U * projected) @ eig.U.conj().T)
