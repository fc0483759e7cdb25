import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import exp1

from conftest import random_complex, random_pd, random_psd_trace
from drt.errors import ConfigurationError
from drt.estimation import (
    _posterior_errors,
    empirical_mse,
    estimate_target,
    paired_mse,
    scalar_avg_mmse,
    scalar_mmse_given_x,
    scalar_posterior_mean,
    vector_mmse_given_X,
    vector_mmse_unrotated,
    vector_posterior_mean,
)
from drt.infomeasures import build_fblocks
from drt.model import (
    ConstantModulusPSK,
    GaussianIID,
    HaarFixedCovariance,
    RngStream,
    Scenario,
    forward_batch,
    forward_sense,
    sample_cov,
    sample_targets,
)

GAUSSIAN_SCALAR_MMSE = np.exp(1.0) * exp1(1.0)


def test_scalar_closed_forms():
    assert scalar_mmse_given_x(1.0, 1.0, 1.0) == pytest.approx(0.5)
    assert scalar_posterior_mean(2.0, 1.0, 1.0, 1.0) == pytest.approx(1.0)


def test_scalar_avg_mmse_quadrature(scalar_scenario):
    estimate = scalar_avg_mmse(GaussianIID(), scalar_scenario, method="quadrature")
    assert estimate.mean == pytest.approx(GAUSSIAN_SCALAR_MMSE, abs=1e-9)
    assert estimate.mean == pytest.approx(0.59634, abs=1e-5)


def test_scalar_avg_mmse_exact_for_psk(scalar_scenario):
    estimate = scalar_avg_mmse(ConstantModulusPSK(), scalar_scenario)
    assert estimate.mean == pytest.approx(0.5)
    assert estimate.stderr == 0.0


def test_scalar_avg_mmse_monte_carlo(scalar_scenario, rng):
    estimate = scalar_avg_mmse(GaussianIID(), scalar_scenario, 50_000, rng)
    assert abs(estimate.mean - GAUSSIAN_SCALAR_MMSE) <= 4 * estimate.stderr


def test_scalar_avg_mmse_needs_scalar(trm_scenario):
    with pytest.raises(ConfigurationError):
        scalar_avg_mmse(GaussianIID(), trm_scenario, method="quadrature")


def test_mmse_forms_agree(gen):
    for N_s, M, T in [(1, 2, 3), (2, 2, 4), (3, 2, 1), (2, 3, 5)]:
        R_h = random_pd(gen, N_s * M)
        R_X = random_psd_trace(gen, M, 1.5)
        fb = build_fblocks(R_h, N_s, M)
        rotated = vector_mmse_given_X(R_X, fb, T, 0.6)
        assert rotated == pytest.approx(
            vector_mmse_unrotated(R_X, R_h, T, 0.6, N_s), abs=1e-9
        )
        assert 0.0 < rotated <= np.trace(R_h).real + 1e-12


def test_worked_instance_mmse(worked_scenario):
    fb = build_fblocks(worked_scenario.R_h, 1, 2)
    assert vector_mmse_given_X(np.diag([1.0, 0.0]), fb, 1, 1.0) == pytest.approx(0.75)


def test_noiseless_posterior_mean_recovers_target(gen):
    N_s, M, T = 2, 2, 2
    X = 2 * np.eye(M) + 0.3 * random_complex(gen, (M, T))
    H = random_complex(gen, (N_s, M))
    Y = forward_sense(X, H, 0.0, RngStream(1))
    estimate = vector_posterior_mean(Y, X, np.eye(N_s * M), 1e-10)
    assert_allclose(estimate, H, atol=1e-6)


def test_estimate_target_bundles_closed_form(gen):
    X = random_complex(gen, (2, 3))
    R_h = random_pd(gen, 2)
    Y = random_complex(gen, (1, 3))
    result = estimate_target(Y, X, R_h, 0.5)
    assert result.estimate.shape == (1, 2)
    assert result.closed_form_mmse == pytest.approx(
        vector_mmse_unrotated(sample_cov(X), R_h, 3, 0.5, 1)
    )
    assert not result.empirical


def test_empirical_mse_of_psk_attains_bound(scalar_scenario, rng):
    estimate = empirical_mse(ConstantModulusPSK(), scalar_scenario, 100_000, rng)
    assert abs(estimate.mean - 0.5) <= 4 * estimate.stderr


def test_empirical_mse_of_haar_matches_closed_form(trm_scenario, rng):
    R = np.eye(2) / 2
    fb = build_fblocks(trm_scenario.R_h, 2, 2)
    estimate = empirical_mse(HaarFixedCovariance(R), trm_scenario, 20_000, rng)
    closed = vector_mmse_given_X(R, fb, 4, 1.0)
    assert abs(estimate.mean - closed) <= 4 * estimate.stderr


def test_paired_mse_difference_is_small(trm_scenario, rng):
    empirical, closed, difference = paired_mse(GaussianIID(), trm_scenario, 20_000, rng)
    assert difference.mean == pytest.approx(empirical.mean - closed.mean)
    assert abs(difference.mean) <= 4 * difference.stderr


def test_empirical_mse_needs_two_trials(scalar_scenario, rng):
    with pytest.raises(ConfigurationError):
        empirical_mse(GaussianIID(), scalar_scenario, 1, rng)


def test_mmse_decreases_along_psd_order(gen):
    for N_s, M, T in [(1, 2, 2), (2, 2, 3), (2, 3, 4)]:
        fb = build_fblocks(random_pd(gen, N_s * M), N_s, M)
        for _ in range(10):
            R = random_psd_trace(gen, M, 1.0)
            v = random_complex(gen, (M, 1))
            larger = R + v @ v.conj().T
            before = vector_mmse_given_X(R, fb, T, 0.8)
            assert vector_mmse_given_X(larger, fb, T, 0.8) < before


def test_mmse_is_convex_in_sample_cov(gen):
    fb = build_fblocks(random_pd(gen, 6), 2, 3)
    for _ in range(50):
        R1 = random_psd_trace(gen, 3, 1.0)
        R2 = random_psd_trace(gen, 3, 1.0)
        midpoint = vector_mmse_given_X((R1 + R2) / 2, fb, 4, 0.7)
        average = (
            vector_mmse_given_X(R1, fb, 4, 0.7) + vector_mmse_given_X(R2, fb, 4, 0.7)
        ) / 2
        assert midpoint <= average + 1e-9


def test_estimation_error_is_orthogonal_to_estimate(gen, rng):
    N_s, M, T, sigma_s2 = 2, 2, 3, 0.5
    R_h = random_pd(gen, N_s * M)
    scn = Scenario(M=M, N_s=N_s, N_c=1, T=T, P_T=1.0, sigma_s2=sigma_s2,
                   sigma_c2=1.0, R_h=R_h)
    X = random_complex(gen, (M, T)) / np.sqrt(2 * M)
    draws = rng.generator()
    count = 5000
    _, H = sample_targets(scn, draws, count)
    Y = forward_batch(X, H, sigma_s2, draws)

    estimates = np.stack([vector_posterior_mean(y, X, R_h, sigma_s2) for y in Y])
    errors = (H - estimates).reshape(count, -1)
    estimates = estimates.reshape(count, -1)
    products = errors[:, :, None] * estimates[:, None, :].conj()
    correlation = products.mean(axis=0)
    stderr = np.sqrt((np.abs(products) ** 2).mean(axis=0) / count)
    assert np.all(np.abs(correlation) <= 4 * stderr)


def test_batched_errors_match_posterior_mean(trm_scenario):
    scheme, count = GaussianIID(), 6
    errors, X = _posterior_errors(scheme, trm_scenario, np.random.default_rng(3), count)

    draws = np.random.default_rng(3)
    signals = scheme.sample_batch(trm_scenario, draws, count)
    _, H = sample_targets(trm_scenario, draws, count)
    Y = forward_batch(signals, H, trm_scenario.sigma_s2, draws)
    assert_allclose(X, signals)
    for k in range(count):
        estimate = vector_posterior_mean(Y[k], signals[k], trm_scenario.R_h, 1.0)
        assert errors[k] == pytest.approx(np.sum(np.abs(H[k] - estimate) ** 2), rel=1e-9)
