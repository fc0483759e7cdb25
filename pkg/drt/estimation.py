"""
Posterior-mean (MMSE) estimation of the target response matrix and the
matching closed-form error values.

Scalar model:  y = h x + z,    h ~ CN(0, σ_h^2), z ~ CN(0, σ_s^2).
Vector model:  vec(Y_s) = X̃ h_s + z_s,    h_s ~ CN(0, R_h).

The Monte Carlo helpers draw (X, H_s, Z_s) per trial from one block
generator in that order, so paired estimates share their X draws.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import quad

from helpers.parallel_utils import monte_carlo_samples

from .errors import ConfigurationError, NumericFailure
from .infomeasures import MCEstimate, build_fblocks
from .model import (
    GaussianColored,
    GaussianIID,
    forward_batch,
    lift,
    lift_batch,
    sample_cov,
    sample_targets,
)
from .numkit import check_psd, eigvalsh_desc, hermitian_eig, vec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """
    A posterior-mean estimate with its closed-form MMSE.

    Attributes:
        estimate (ndarray): Ĥ_s (or ĥ for a scalar model).
        closed_form_mmse (float): MMSE given the probe, never negative.
        empirical (bool): True when the error value comes from sampling.
    """

    estimate: np.ndarray
    closed_form_mmse: float
    empirical: bool = False


def scalar_posterior_mean(y, x, sigma_h2, sigma_s2):
    """ĥ = σ_h^2 conj(x) y / (σ_h^2 |x|^2 + σ_s^2)."""
    return sigma_h2 * np.conj(x) * y / (sigma_h2 * abs(x) ** 2 + sigma_s2)


def scalar_mmse_given_x(x_abs2, sigma_h2, sigma_s2):
    """MMSE 1 / (σ_h^{-2} + σ_s^{-2} |x|^2) of a known scalar probe."""
    return 1.0 / (1.0 / sigma_h2 + x_abs2 / sigma_s2)


def _check_scalar(scn):
    if scn.M != 1 or scn.T != 1 or scn.N_s != 1:
        raise ConfigurationError("scalar estimation needs M = T = N_s = 1")


def scalar_avg_mmse(scheme, scn, trials=None, rng=None, method="montecarlo",
                    jobs=None):
    """
    MMSE averaged over the probe distribution, E_X{mmse(H_s | X)}.

    Schemes with a constant |X|^2 are evaluated exactly. Gaussian schemes
    average over |X|^2 ~ Exp(E|X|^2) either by Monte Carlo or by quadrature.

    Args:
        scheme (SignalScheme): Signaling distribution.
        scn (Scenario): A scenario with M = T = N_s = 1.
        trials (int, optional): Monte Carlo trials.
        rng (RngStream, optional): Randomness source for Monte Carlo.
        method (str): "montecarlo" or "quadrature".
        jobs (int, optional): Worker threads.

    Returns:
        MCEstimate: The average MMSE (stderr 0 when exact).

    Raises:
        ConfigurationError: For a non-scalar scenario or unknown method.
    """
    _check_scalar(scn)
    scheme.validate(scn)
    sigma_h2 = scn.sigma_h2
    power = float(scheme.statistical_cov(scn)[0, 0].real)

    if scheme.fixed_sample_cov:
        return MCEstimate.exact(scalar_mmse_given_x(power, sigma_h2, scn.sigma_s2))

    if method == "quadrature":
        if not isinstance(scheme, (GaussianIID, GaussianColored)):
            raise ConfigurationError("quadrature covers Gaussian schemes only")
        if power == 0.0:
            return MCEstimate.exact(sigma_h2)
        value, _ = quad(
            lambda u: scalar_mmse_given_x(power * u, sigma_h2, scn.sigma_s2)
            * np.exp(-u),
            0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200
        )
        return MCEstimate.exact(value)

    if method != "montecarlo":
        raise ConfigurationError(f"unknown averaging method {method!r}")
    if trials is None or rng is None or trials < 2:
        raise ConfigurationError("Monte Carlo averaging needs trials >= 2 and rng")

    def block(gen, count):
        X = scheme.sample_batch(scn, gen, count)
        return scalar_mmse_given_x(np.abs(X[:, 0, 0]) ** 2, sigma_h2, scn.sigma_s2)

    return MCEstimate.from_samples(monte_carlo_samples(block, trials, rng, jobs))


def _gram_solve(gram, rhs):
    """Solve gram @ z = rhs for Hermitian PD gram, Cholesky first."""
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True)
        return scipy.linalg.cho_solve(factor, rhs)
    except np.linalg.LinAlgError:
        logger.debug("Cholesky failed, falling back to eigendecomposition")

    eig = hermitian_eig(gram)
    largest = max(abs(eig.lambdas[0]), 1e-300)
    if eig.lambdas[-1] <= 1e-14 * largest:
        raise NumericFailure("observation Gram matrix is numerically singular")
    return eig.U @ ((eig.U.conj().T @ rhs) / eig.lambdas[:, None])


def vector_posterior_mean(Y_s, X, R_h, sigma_s2):
    """
    Posterior mean of H_s given the echo and the probe.

    Args:
        Y_s (ndarray): N_s x T echo.
        X (ndarray): M x T probe.
        R_h (ndarray): Prior covariance of vec(H_s).
        sigma_s2 (float): Sensing noise variance.

    Returns:
        ndarray: Ĥ_s of shape N_s x M, the reshaped
                 R_h X̃^H (X̃ R_h X̃^H + σ_s^2 I)^{-1} vec(Y_s).

    Raises:
        NumericFailure: If the observation Gram matrix is singular.
    """
    Y_s = np.atleast_2d(np.asarray(Y_s, dtype=complex))
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    R_h = np.asarray(R_h, dtype=complex)
    N_s, M = Y_s.shape[0], X.shape[0]

    lifted = lift(X, N_s)
    gram = lifted @ R_h @ lifted.conj().T + sigma_s2 * np.eye(lifted.shape[0])
    weights = _gram_solve(gram, vec(Y_s)[:, None])[:, 0]
    estimate = R_h @ lifted.conj().T @ weights
    return estimate.reshape((N_s, M), order="F")


def estimate_target(Y_s, X, R_h, sigma_s2):
    """Posterior mean of H_s bundled with its closed-form MMSE given X."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    R_h = np.asarray(R_h, dtype=complex)
    N_s = np.atleast_2d(Y_s).shape[0]
    estimate = vector_posterior_mean(Y_s, X, R_h, sigma_s2)
    mmse = vector_mmse_unrotated(sample_cov(X), R_h, X.shape[1], sigma_s2, N_s)
    return EstimationResult(estimate=estimate, closed_form_mmse=mmse)


def vector_mmse_given_X(R_X, fb, T, sigma_s2):
    """
    MMSE of the TRM given a probe with sample covariance R_X.

    Args:
        R_X (ndarray): PSD sample covariance (M x M).
        fb (FBlockSet): Prior eigen-structure.
        T (int): Block length.
        sigma_s2 (float): Sensing noise variance.

    Returns:
        float: tr[(Λ_h^{-1} + σ_s^{-2} T Σ_i F_i R_X F_i^H)^{-1}].
    """
    R_X = check_psd(R_X, "R_X")
    return float(_rotated_mmse(R_X, fb, T, sigma_s2))


def _rotated_mmse(R_X, fb, T, sigma_s2):
    """Rotated-coordinate MMSE trace; R_X may be a stack."""
    precision = (T / sigma_s2) * fb.congruence(R_X)
    precision = precision + np.diag(1.0 / fb.lambdas)
    return np.sum(1.0 / eigvalsh_desc(precision), axis=-1)


def vector_mmse_unrotated(R_X, R_h, T, sigma_s2, N_s):
    """
    The same MMSE in the original coordinates,
    tr[(R_h^{-1} + σ_s^{-2} T (R_X^* ⊗ I_{N_s}))^{-1}].
    """
    R_X = check_psd(R_X, "R_X")
    R_h = np.asarray(R_h, dtype=complex)
    precision = np.linalg.inv(R_h) + (T / sigma_s2) * np.kron(
        R_X.conj(), np.eye(N_s)
    )
    return float(np.sum(1.0 / eigvalsh_desc(precision)))


def _posterior_errors(scheme, scn, gen, count):
    """Squared errors ‖H_s − Ĥ_s‖_F^2 and the probes of one trial block."""
    X = scheme.sample_batch(scn, gen, count)
    h, H = sample_targets(scn, gen, count)
    Y = forward_batch(X, H, scn.sigma_s2, gen)
    y = Y.swapaxes(-1, -2).reshape(count, -1)

    lifted = lift_batch(X, scn.N_s)
    lifted_h = lifted.conj().swapaxes(-1, -2)
    gram = lifted @ scn.R_h @ lifted_h + scn.sigma_s2 * np.eye(lifted.shape[1])
    try:
        chol = np.linalg.cholesky(gram)
        inner = np.linalg.solve(chol, y[..., None])
        weights = np.linalg.solve(chol.conj().swapaxes(-1, -2), inner)[..., 0]
    except np.linalg.LinAlgError:
        weights = np.stack([_gram_solve(g, v[:, None])[:, 0] for g, v in zip(gram, y)])
    estimate = np.einsum("ab,kbc,kc->ka", scn.R_h, lifted_h, weights)
    return np.sum(np.abs(h - estimate) ** 2, axis=-1), X


def empirical_mse(scheme, scn, trials, rng, jobs=None, job_progress=None):
    """
    Empirical MSE of the posterior-mean estimator over independent
    (X, H_s, Z_s) draws.

    Returns:
        MCEstimate: Mean of ‖H_s − Ĥ_s‖_F^2 with its standard error.
    """
    scheme.validate(scn)
    if trials < 2:
        raise ConfigurationError("Monte Carlo estimates need at least 2 trials")

    def block(gen, count):
        errors, _ = _posterior_errors(scheme, scn, gen, count)
        return errors

    samples = monte_carlo_samples(
        block, trials, rng, jobs, job_progress, f"Estimation MSE ({scheme.label})"
    )
    return MCEstimate.from_samples(samples)


def paired_mse(scheme, scn, trials, rng, fb=None, jobs=None, job_progress=None):
    """
    Empirical MSE and the closed-form MMSE averaged over the same probes.

    Returns:
        tuple: (empirical, closed_form, difference) as MCEstimate values;
               `difference` is the per-trial paired difference, whose
               standard error is the right one for comparing the two.
    """
    scheme.validate(scn)
    if trials < 2:
        raise ConfigurationError("Monte Carlo estimates need at least 2 trials")
    fb = fb if fb is not None else build_fblocks(scn.R_h, scn.N_s, scn.M)

    def block(gen, count):
        errors, X = _posterior_errors(scheme, scn, gen, count)
        closed = _rotated_mmse(sample_cov(X), fb, scn.T, scn.sigma_s2)
        return np.stack([errors, closed], axis=-1)

    samples = monte_carlo_samples(
        block, trials, rng, jobs, job_progress, f"Paired MSE ({scheme.label})"
    )
    return (
        MCEstimate.from_samples(samples[:, 0]),
        MCEstimate.from_samples(samples[:, 1]),
        MCEstimate.from_samples(samples[:, 0] - samples[:, 1]),
    )
