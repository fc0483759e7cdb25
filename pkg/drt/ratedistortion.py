"""
Rate-distortion and distortion-rate functions of complex Gaussian sources
under squared error, and the expected Hamming distortion of a binary
detector.

Vector sources are handled by reverse water-filling over the eigenvalues of
the source covariance: with water level μ, component i is described with
distortion min(λ_i, μ) and rate (log2(λ_i/μ))⁺. The per-component
distortion is the MMSE of a water-filled sensing probe, which is what makes
R(mmse) coincide with the sensing MI at the sensing optimum.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from helpers.config import BISECT_MAXITER, BISECT_RTOL, LOG_BISECT_XTOL

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class ReverseWaterfill:
    """
    Reverse water-filling solution.

    Attributes:
        mu (float): Water level μ.
        per_component_distortion (ndarray): min(λ_i, μ).
        rate_bits (float): Σ (log2(λ_i/μ))⁺.
        distortion (float): Σ min(λ_i, μ).
    """

    mu: float
    per_component_distortion: np.ndarray
    rate_bits: float
    distortion: float


def _check_spectrum(lambdas):
    values = np.asarray(lambdas, dtype=float).ravel()
    if values.size == 0 or np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise DomainError("source eigenvalues must be positive and finite")
    return values


def _waterfill_at(mu, lambdas):
    distortions = np.minimum(lambdas, mu)
    rate = float(np.sum(np.maximum(np.log2(lambdas / mu), 0.0)))
    return ReverseWaterfill(mu, distortions, rate, float(distortions.sum()))


def scalar_rd(D, sigma_h2):
    """R_G(D) = max(0, log2(σ_h^2 / D)) in bits; D must be positive."""
    if D <= 0.0:
        raise DomainError(f"distortion must be positive, got {D}")
    return max(0.0, float(np.log2(sigma_h2 / D)))


def scalar_dr(R, sigma_h2):
    """D_G(R) = σ_h^2 2^{-R}; R must be nonnegative."""
    if R < 0.0:
        raise DomainError(f"rate must be nonnegative, got {R}")
    return float(sigma_h2 * 2.0 ** (-R))


def vector_dr(R, lambdas):
    """
    Distortion-rate function of a Gaussian vector with eigenvalues `lambdas`.

    The water level is found by bisection on log2 μ, where the rate
    Σ (log2 λ_i − log2 μ)⁺ is piecewise linear and decreasing.

    Args:
        R (float): Rate in bits, nonnegative.
        lambdas (array_like): Positive source eigenvalues.

    Returns:
        ReverseWaterfill: Water level, per-component distortions, rate and
                          total distortion.
    """
    if R < 0.0 or not np.isfinite(R):
        raise DomainError(f"rate must be finite and nonnegative, got {R}")

    values = _check_spectrum(lambdas)
    top = float(np.log2(values.max()))
    if R == 0.0:
        return _waterfill_at(values.max(), values)

    log_values = np.log2(values)

    def excess_rate(level):
        return float(np.sum(np.maximum(log_values - level, 0.0))) - R

    level = bisect(
        excess_rate, top - R, top,
        xtol=LOG_BISECT_XTOL, rtol=BISECT_RTOL, maxiter=BISECT_MAXITER
    )
    return _waterfill_at(2.0 ** level, values)


def vector_rd(D, lambdas):
    """
    Rate-distortion function of a Gaussian vector, in bits.

    Args:
        D (float): Target distortion, 0 < D <= Σ λ_i.
        lambdas (array_like): Positive source eigenvalues.

    Returns:
        float: Σ (log2(λ_i/μ))⁺ with μ solving Σ min(λ_i, μ) = D.

    Raises:
        DomainError: If D lies outside (0, Σ λ_i].
    """
    values = _check_spectrum(lambdas)
    total = float(values.sum())
    if D <= 0.0 or D > total * (1.0 + 1e-12):
        raise DomainError(f"distortion {D} outside (0, {total}]")
    if D >= total:
        return 0.0

    def excess_distortion(mu):
        return float(np.sum(np.minimum(values, mu))) - D

    mu = bisect(
        excess_distortion, D / values.size, float(values.max()),
        xtol=1e-300, rtol=BISECT_RTOL, maxiter=BISECT_MAXITER
    )
    return _waterfill_at(mu, values).rate_bits


def _check_probability(value, name):
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


def hamming_expected(P_D, P_FA, prior1):
    """
    Expected Hamming distortion of a binary detector.

    Args:
        P_D (float): Detection probability.
        P_FA (float): False-alarm probability.
        prior1 (float): Prior probability that the target is present.

    Returns:
        float: prior1 (1 − P_D) + (1 − prior1) P_FA.
    """
    _check_probability(P_D, "P_D")
    _check_probability(P_FA, "P_FA")
    _check_probability(prior1, "prior1")
    return prior1 * (1.0 - P_D) + (1.0 - prior1) * P_FA


def hamming_unweighted(P_D, P_FA):
    """Prior-free sum of miss and false-alarm rates, 1 − P_D + P_FA."""
    _check_probability(P_D, "P_D")
    _check_probability(P_FA, "P_FA")
    return 1.0 - P_D + P_FA
