"""
Communication-side metrics, all in bits per symbol:

    - the Gaussian-signaling rate log2 |I + σ_c^{-2} H_c R H_c^H| and its
      ergodic average over channel draws;
    - the high-SNR rate when the sample covariance is pinned to R*,
      (1 − L/(2T)) log2 |σ_c^{-2} H_c R* H_c^H| + c0(L, T), where
      L = rank(H_c R* H_c^H) and the vanishing O(σ_c^2) term is dropped;
    - the water-filling covariance that maximizes the average Gaussian rate;
    - the constellation-constrained rate of PSK over a scalar AWGN channel.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from helpers.config import RANK_RTOL
from helpers.parallel_utils import monte_carlo_samples

from .covopt import waterfill
from .errors import ConfigurationError, DomainError
from .infomeasures import MCEstimate
from .model import complex_gaussian
from .numkit import LOG2E, check_psd, eigvalsh_desc, hermitian_eig, logdet_pd

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapacityResult:
    """
    High-SNR rate under a fixed sample covariance.

    Attributes:
        rate_bits_per_symbol (float): Average of the rate over channel draws.
        L (int): Rank of H_c R* H_c^H (most frequent over the draws).
        c0_bits (float): c0(L, T).
        pre_log (float): 1 − L/(2T).
        stderr (float): Standard error of the average over draws.
        rank_deficient (bool): True when L < N_c, i.e. the pseudo-determinant
                               over the nonzero eigenvalues was used.
    """

    rate_bits_per_symbol: float
    L: int
    c0_bits: float
    pre_log: float
    stderr: float = 0.0
    rank_deficient: bool = False


def gaussian_rate(H_c, R, sigma_c2):
    """Rate log2 |I + σ_c^{-2} H_c R H_c^H| of Gaussian signaling with covariance R."""
    H_c = np.atleast_2d(np.asarray(H_c, dtype=complex))
    R = check_psd(np.atleast_2d(R), "R")
    if H_c.shape[1] != R.shape[0]:
        raise ConfigurationError("channel and covariance do not conform")
    gram = H_c @ R @ H_c.conj().T / sigma_c2
    return logdet_pd(np.eye(H_c.shape[0]) + gram)


def ergodic_gaussian_rate(Hc_samples, R, sigma_c2):
    """Sample mean and standard error of `gaussian_rate` over channel draws."""
    if len(Hc_samples) < 1:
        raise ConfigurationError("at least one channel sample is needed")
    rates = [gaussian_rate(H_c, R, sigma_c2) for H_c in Hc_samples]
    return MCEstimate.from_samples(rates)


def c0(L, T):
    """
    Constant term of the high-SNR rate, in bits:
    (L/T) [(T − L/2) log2(T/e) − log2 Γ(T) + log2(2√π)].
    """
    if L < 0 or T < 1:
        raise DomainError(f"c0 needs L >= 0 and T >= 1, got L={L}, T={T}")
    if L == 0:
        return 0.0
    bracket = (
        (T - L / 2.0) * (np.log(T) - 1.0)
        - gammaln(T)
        + np.log(2.0 * np.sqrt(np.pi))
    )
    return float(L / T * bracket * LOG2E)


def high_snr_rate(Hc_samples, R_star, sigma_c2, T, rtol=RANK_RTOL):
    """
    High-SNR ergodic rate when every block has sample covariance R_star.

    Args:
        Hc_samples (list): Channel draws, each N_c x M.
        R_star (ndarray): The pinned sample covariance.
        sigma_c2 (float): Positive noise variance.
        T (int): Block length.
        rtol (float): Relative eigenvalue threshold defining the rank.

    Returns:
        CapacityResult: Averaged rate and the pre-log data.

    Raises:
        DomainError: If some H_c R* H_c^H vanishes or the pre-log is not
                     positive.
    """
    if sigma_c2 <= 0.0 or T < 1:
        raise DomainError("high-SNR rate needs sigma_c2 > 0 and T >= 1")
    R_star = check_psd(np.atleast_2d(R_star), "R_star")

    rates, ranks = [], []
    rank_deficient = False
    for H_c in Hc_samples:
        H_c = np.atleast_2d(np.asarray(H_c, dtype=complex))
        eigenvalues = eigvalsh_desc(H_c @ R_star @ H_c.conj().T)
        if eigenvalues[0] <= 0.0:
            raise DomainError("H_c R* H_c^H is zero; the rate is undefined")
        L = int(np.count_nonzero(eigenvalues > rtol * eigenvalues[0]))
        pre_log = 1.0 - L / (2.0 * T)
        if pre_log <= 0.0:
            raise DomainError(f"pre-log 1 - L/(2T) is not positive (L={L}, T={T})")
        rank_deficient |= L < H_c.shape[0]
        pseudo_logdet = float(np.sum(np.log2(eigenvalues[:L] / sigma_c2)))
        rates.append(pre_log * pseudo_logdet + c0(L, T))
        ranks.append(L)

    if rank_deficient:
        logger.debug("rank-deficient H_c R* H_c^H: pseudo-determinant used")

    L = int(np.bincount(ranks).argmax())
    estimate = MCEstimate.from_samples(rates)
    return CapacityResult(
        rate_bits_per_symbol=estimate.mean,
        L=L,
        c0_bits=c0(L, T),
        pre_log=1.0 - L / (2.0 * T),
        stderr=estimate.stderr,
        rank_deficient=rank_deficient,
    )


def comm_optimal_cov(Hc_samples, sigma_c2, P_T, rtol=RANK_RTOL):
    """
    Water-filling covariance on the average Gram matrix E{H_c^H H_c}.

    Returns:
        ndarray: V diag(p) V^H with p water-filled over the nonzero
                 eigenvalues of the average Gram matrix and tr = P_T.

    Raises:
        ConfigurationError: If every channel sample is zero.
    """
    gram = np.mean([H.conj().T @ H for H in map(np.atleast_2d, Hc_samples)], axis=0)
    eig = hermitian_eig(gram)
    if eig.lambdas[0] <= 0.0:
        raise ConfigurationError("communication channel is identically zero")

    active = eig.lambdas > rtol * eig.lambdas[0]
    powers = np.zeros_like(eig.lambdas)
    powers[active] = waterfill(eig.lambdas[active], 1, sigma_c2, P_T).betas
    R = (eig.U * powers) @ eig.U.conj().T
    return 0.5 * (R + R.conj().T)


def psk_rate(order, snr, trials, rng, jobs=None):
    """
    Constellation-constrained rate of unit-energy PSK over y = x + z,
    z ~ CN(0, 1/snr), in bits per symbol.

    Uses I = log2 Q − E log2 Σ_j exp(−(|x − x_j + z|² − |z|²) snr) with x
    uniform over the constellation.

    Returns:
        MCEstimate: Mean and standard error.
    """
    if order < 2:
        raise ConfigurationError("PSK order must be at least 2")
    if snr < 0.0:
        raise DomainError("SNR must be nonnegative")
    points = np.exp(2j * np.pi * np.arange(order) / order)
    if snr == 0.0:
        return MCEstimate.exact(0.0)

    def block(gen, count):
        sent = points[gen.integers(0, order, size=count)]
        noise = complex_gaussian(gen, count, 1.0 / snr)
        distances = np.abs(sent[:, None] - points[None, :] + noise[:, None]) ** 2
        exponents = -(distances - np.abs(noise[:, None]) ** 2) * snr
        return np.log2(order) - logsumexp(exponents, axis=1) * LOG2E

    return MCEstimate.from_samples(monte_carlo_samples(block, trials, rng, jobs))
