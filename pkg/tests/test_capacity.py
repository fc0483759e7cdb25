import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_complex
from drt.capacity import (
    c0,
    comm_optimal_cov,
    ergodic_gaussian_rate,
    gaussian_rate,
    high_snr_rate,
    psk_rate,
)
from drt.errors import ConfigurationError, DomainError


def test_c0_values():
    assert c0(1, 1) == pytest.approx(1.1044, abs=1e-4)
    assert c0(0, 5) == 0.0
    assert c0(1, 4096) < 5e-4
    assert 4096 * c0(1, 4096) == pytest.approx(1.2213, abs=1e-3)
    with pytest.raises(DomainError):
        c0(-1, 2)
    with pytest.raises(DomainError):
        c0(1, 0)


def test_c0_vanishes_with_block_length():
    values = [abs(c0(1, T)) for T in 2 ** np.arange(3, 13)]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))


def test_gaussian_rate():
    assert gaussian_rate(np.ones((1, 1)), np.eye(1), 1.0) == pytest.approx(1.0)
    assert gaussian_rate(np.eye(2), np.eye(2), 1 / 3) == pytest.approx(4.0)
    with pytest.raises(ConfigurationError):
        gaussian_rate(np.ones((1, 3)), np.eye(2), 1.0)


def test_ergodic_gaussian_rate(gen):
    draws = [random_complex(gen, (2, 2)) for _ in range(30)]
    estimate = ergodic_gaussian_rate(draws, np.eye(2) / 2, 0.1)
    rates = [gaussian_rate(H, np.eye(2) / 2, 0.1) for H in draws]
    assert estimate.mean == pytest.approx(np.mean(rates))
    with pytest.raises(ConfigurationError):
        ergodic_gaussian_rate([], np.eye(2), 1.0)


@pytest.mark.parametrize("P, sigma_c2", [(1.0, 0.01), (4.0, 1e-3), (0.5, 1.0)])
def test_high_snr_rate_scalar(P, sigma_c2):
    result = high_snr_rate([np.ones((1, 1))], P * np.eye(1), sigma_c2, 1)
    assert result.L == 1
    assert result.pre_log == pytest.approx(0.5)
    assert result.rate_bits_per_symbol == pytest.approx(
        0.5 * np.log2(P / sigma_c2) + c0(1, 1)
    )
    assert not result.rank_deficient


def test_high_snr_rate_full_rank(gen):
    draws = [random_complex(gen, (2, 2)) for _ in range(10)]
    result = high_snr_rate(draws, np.eye(2) / 2, 0.01, 4)
    assert result.L == 2
    assert result.pre_log == pytest.approx(0.75)
    assert result.c0_bits == pytest.approx(c0(2, 4))


def test_high_snr_rate_rank_deficient(gen):
    draws = [random_complex(gen, (2, 2)) for _ in range(5)]
    result = high_snr_rate(draws, np.diag([1.0, 0.0]), 0.01, 4)
    assert result.L == 1
    assert result.rank_deficient


def test_high_snr_rate_domain(gen):
    with pytest.raises(DomainError):
        high_snr_rate([np.zeros((1, 2))], np.eye(2), 0.1, 2)
    with pytest.raises(DomainError):
        high_snr_rate([random_complex(gen, (2, 2))], np.eye(2), 0.1, 1)


def test_comm_optimal_cov(gen):
    draws = [random_complex(gen, (2, 3)) for _ in range(20)]
    R = comm_optimal_cov(draws, 0.1, 2.0)
    assert np.trace(R).real == pytest.approx(2.0)
    assert np.linalg.eigvalsh(R).min() >= -1e-12
    # Rank-one channel: all power on the single direction.
    h = np.array([[1.0, 1.0j]])
    R = comm_optimal_cov([h], 1.0, 1.0)
    assert_allclose(R, h.conj().T @ h / 2, atol=1e-12)
    with pytest.raises(ConfigurationError):
        comm_optimal_cov([np.zeros((1, 2))], 1.0, 1.0)


def test_psk_rate_bounds(rng):
    for order, snr in [(2, 0.5), (4, 1.0), (8, 10.0)]:
        estimate = psk_rate(order, snr, 20_000, rng)
        margin = 4 * estimate.stderr + 1e-12
        assert estimate.mean <= np.log2(1 + snr) + margin
        assert estimate.mean <= np.log2(order) + margin
        assert estimate.mean > 0.0


def test_psk_rate_edges(rng):
    assert psk_rate(4, 0.0, 100, rng).mean == 0.0
    assert psk_rate(2, 100.0, 5000, rng).mean == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ConfigurationError):
        psk_rate(1, 1.0, 100, rng)


def test_gaussian_rate_is_unitarily_invariant(gen):
    H = random_complex(gen, (3, 2))
    A = random_complex(gen, (2, 2))
    R = A @ A.conj().T
    U, _ = np.linalg.qr(random_complex(gen, (2, 2)))
    rotated = gaussian_rate(H @ U, U.conj().T @ R @ U, 0.3)
    assert rotated == pytest.approx(gaussian_rate(H, R, 0.3), abs=1e-10)
