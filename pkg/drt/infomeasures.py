"""
Sensing mutual information between the echo and the target response matrix
given the probe signal, in bits.

With R_h = U Λ_h U^H and F_i the rotated blocks of the commutation matrix,
the information carried by one block X with sample covariance R_X is

    I(R_X) = log2 | I + σ_s^{-2} T Λ_h Σ_i F_i R_X F_i^H |,

which equals log2 | I + σ_s^{-2} X̃ R_h X̃^H | for X̃ = X^T ⊗ I_{N_s}. The
determinant is evaluated in the similarity-symmetrized form
I + c Λ^{1/2} S Λ^{1/2} so that it stays Hermitian. Log-determinants are
taken in nats and converted to bits once.

In the target-response-matrix case eta = vec(H_s), so the information about
eta and about H_s coincide and no separate parameter model is needed.
"""

import logging
from dataclasses import dataclass

import numpy as np

from helpers.parallel_utils import monte_carlo_samples

from .errors import ConfigurationError, DomainError
from .model import lift, sample_cov
from .numkit import (
    LOG2E,
    check_psd,
    commutation_matrix,
    hermitian_eig,
    hermitian_part,
    logdet_pd_batch_nats,
    logdet_pd_nats,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MCEstimate:
    """
    Monte Carlo mean with its standard error.

    Attributes:
        mean (float): Sample mean.
        stderr (float): Sample standard deviation over sqrt(trials).
        trials (int): Number of samples.
    """

    mean: float
    stderr: float
    trials: int

    @classmethod
    def from_samples(cls, samples):
        """Build an estimate from a one-dimensional sample array."""
        samples = np.asarray(samples, dtype=float)
        count = samples.size
        if count < 2:
            return cls(float(samples.mean()), 0.0, count)
        stderr = samples.std(ddof=1) / np.sqrt(count)
        return cls(float(samples.mean()), float(stderr), count)

    @classmethod
    def exact(cls, value):
        """A value known without sampling error."""
        return cls(float(value), 0.0, 1)


@dataclass(frozen=True, eq=False)
class FBlockSet:
    """
    Eigen-structure of the target prior and the blocks F_1..F_{N_s}.

    Attributes:
        U (ndarray): Eigenvectors of R_h.
        lambdas (ndarray): Descending eigenvalues of R_h.
        blocks (ndarray): Shape (N_s, N_s*M, M); blocks[i] is F_{i+1}.
        N_s (int): Sensing-receiver antennas.
        M (int): Transmit antennas.
    """

    U: np.ndarray
    lambdas: np.ndarray
    blocks: np.ndarray
    N_s: int
    M: int

    def congruence(self, R):
        """S = Σ_i F_i R F_i^H for one M x M matrix or a stack of them."""
        S = np.einsum("iam,...mn,ibn->...ab", self.blocks, R, self.blocks.conj())
        return hermitian_part(S)

    def adjoint(self, W):
        """Σ_i F_i^H W F_i, the adjoint of `congruence`."""
        G = np.einsum("iam,ab,ibn->mn", self.blocks.conj(), W, self.blocks)
        return hermitian_part(G)


def scalar_mi(x_abs2, sigma_h2, sigma_s2):
    """Sensing MI log2(1 + |x|^2 σ_h^2 / σ_s^2) of one scalar probe, in bits."""
    return float(np.log2(1.0 + x_abs2 * sigma_h2 / sigma_s2))


def scalar_mi_max(P_T, sigma_h2, sigma_s2):
    """Upper bound log2(1 + P_T σ_h^2 / σ_s^2) reached by constant modulus."""
    return scalar_mi(P_T, sigma_h2, sigma_s2)


def build_fblocks(R_h, N_s, M):
    """
    Eigendecompose the prior and form the blocks F_i.

    F̃ = U^H K is split into N_s column blocks of width M and F_i = conj(F̃_i),
    where K is the permutation with K (I_{N_s} ⊗ B) K^T = B ⊗ I_{N_s} for
    every M x M matrix B.

    Args:
        R_h (ndarray): PD prior covariance of vec(H_s), N_s*M x N_s*M.
        N_s (int): Sensing-receiver antennas.
        M (int): Transmit antennas.

    Returns:
        FBlockSet: The eigen-structure and blocks.

    Raises:
        ConfigurationError: If R_h does not have dimension N_s*M.
    """
    R_h = np.asarray(R_h, dtype=complex)
    if R_h.shape != (N_s * M, N_s * M):
        raise ConfigurationError(
            f"R_h must be {N_s * M}x{N_s * M}, got {R_h.shape}"
        )

    eig = hermitian_eig(R_h)
    if eig.lambdas[-1] <= 0.0:
        raise DomainError("R_h must be positive definite")

    K = commutation_matrix(M, N_s)
    rotated = eig.U.conj().T @ K
    blocks = np.stack(
        [rotated[:, i * M:(i + 1) * M].conj() for i in range(N_s)]
    )
    return FBlockSet(U=eig.U, lambdas=eig.lambdas, blocks=blocks, N_s=N_s, M=M)


def _information_matrix(S, fb, T, sigma_s2):
    """I + σ_s^{-2} T Λ^{1/2} S Λ^{1/2} (stacks allowed)."""
    root = np.sqrt(fb.lambdas)
    scaled = (T / sigma_s2) * (root[:, None] * S * root[None, :])
    return np.eye(fb.lambdas.size) + scaled


def mi_given_cov_nats(R, fb, T, sigma_s2):
    """`mi_given_cov` in nats, used by the optimizer."""
    R = check_psd(R, "R")
    return logdet_pd_nats(_information_matrix(fb.congruence(R), fb, T, sigma_s2))


def mi_given_cov(R, fb, T, sigma_s2):
    """
    Sensing MI of one block with sample covariance R, in bits.

    Args:
        R (ndarray): PSD M x M covariance.
        fb (FBlockSet): Prior eigen-structure.
        T (int): Block length.
        sigma_s2 (float): Sensing noise variance.

    Returns:
        float: log2 | I + σ_s^{-2} T Λ_h Σ_i F_i R F_i^H |.

    Raises:
        DomainError: If R is not PSD.
    """
    return mi_given_cov_nats(R, fb, T, sigma_s2) * LOG2E


def mi_given_cov_batch(R, fb, T, sigma_s2):
    """`mi_given_cov` for a stack of covariances, in bits (no validation)."""
    W = _information_matrix(fb.congruence(R), fb, T, sigma_s2)
    return logdet_pd_batch_nats(W) * LOG2E


def mi_direct(X, R_h, sigma_s2):
    """
    Sensing MI evaluated directly on the lifted probe, in bits.

    Args:
        X (ndarray): M x T probe.
        R_h (ndarray): Prior covariance of vec(H_s).
        sigma_s2 (float): Sensing noise variance.

    Returns:
        float: log2 | I + σ_s^{-2} X̃ R_h X̃^H |.
    """
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    R_h = np.asarray(R_h, dtype=complex)
    N_s = R_h.shape[0] // X.shape[0]
    if N_s * X.shape[0] != R_h.shape[0]:
        raise ConfigurationError("R_h dimension is not a multiple of M")

    lifted = lift(X, N_s)
    W = np.eye(lifted.shape[0]) + lifted @ R_h @ lifted.conj().T / sigma_s2
    return logdet_pd_nats(hermitian_part(W)) * LOG2E


def ergodic_sensing_mi(scheme, scn, trials, rng, fb=None, jobs=None,
                       job_progress=None):
    """
    Ergodic sensing MI E{I(R_X)} of a signaling scheme, in bits.

    Schemes whose sample covariance does not depend on the draw are
    evaluated exactly; the others are averaged over `trials` draws.

    Args:
        scheme (SignalScheme): Signaling distribution.
        scn (Scenario): Problem instance.
        trials (int): Monte Carlo trials (at least 2).
        rng (RngStream): Randomness source.
        fb (FBlockSet, optional): Precomputed blocks of `scn.R_h`.
        jobs (int, optional): Worker threads.
        job_progress (Progress, optional): Rich progress tracker.

    Returns:
        MCEstimate: Mean and standard error in bits.
    """
    scheme.validate(scn)
    fb = fb if fb is not None else build_fblocks(scn.R_h, scn.N_s, scn.M)

    if scheme.fixed_sample_cov:
        cov = scheme.statistical_cov(scn)
        return MCEstimate.exact(mi_given_cov(cov, fb, scn.T, scn.sigma_s2))

    if trials < 2:
        raise ConfigurationError("Monte Carlo estimates need at least 2 trials")

    def block(gen, count):
        X = scheme.sample_batch(scn, gen, count)
        return mi_given_cov_batch(sample_cov(X), fb, scn.T, scn.sigma_s2)

    samples = monte_carlo_samples(
        block, trials, rng, jobs, job_progress, f"Sensing MI ({scheme.label})"
    )
    estimate = MCEstimate.from_samples(samples)
    logger.debug("ergodic MI %s: %.6f ± %.2e bits", scheme.label,
                 estimate.mean, estimate.stderr)
    return estimate


def mi_gradient(R, fb, T, sigma_s2):
    """
    Gradient of `mi_given_cov` with respect to R, in nats per unit of R.

    The directional derivative along a Hermitian Δ is Re tr(G Δ); multiply by
    log2(e) for bits.

    Returns:
        ndarray: G = σ_s^{-2} T Σ_i F_i^H Λ^{1/2} W^{-1} Λ^{1/2} F_i, with
                 W = I + σ_s^{-2} T Λ^{1/2} S Λ^{1/2}; Hermitian PSD.
    """
    R = check_psd(R, "R")
    W = _information_matrix(fb.congruence(R), fb, T, sigma_s2)
    root = np.sqrt(fb.lambdas)
    inner = np.linalg.solve(W, np.diag(root).astype(complex))
    inner = root[:, None] * inner
    return (T / sigma_s2) * fb.adjoint(hermitian_part(inner))
