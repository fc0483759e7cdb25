import numpy as np
import pytest

from drt.errors import DomainError
from drt.ratedistortion import (
    hamming_expected,
    hamming_unweighted,
    scalar_dr,
    scalar_rd,
    vector_dr,
    vector_rd,
)


def test_scalar_functions():
    assert scalar_rd(0.5, 1.0) == pytest.approx(1.0)
    assert scalar_rd(2.0, 1.0) == 0.0
    assert scalar_dr(1.0, 1.0) == pytest.approx(0.5)
    assert scalar_dr(0.0, 3.0) == 3.0
    with pytest.raises(DomainError):
        scalar_rd(0.0, 1.0)
    with pytest.raises(DomainError):
        scalar_dr(-1.0, 1.0)


def test_vector_dr_reduces_to_scalar():
    solution = vector_dr(2.0, [4.0])
    assert solution.distortion == pytest.approx(1.0)
    assert solution.rate_bits == pytest.approx(2.0)


def test_vector_dr_zero_rate_keeps_full_variance():
    solution = vector_dr(0.0, [1.0, 0.25])
    assert solution.distortion == pytest.approx(1.25)
    assert solution.rate_bits == 0.0


def test_vector_dr_leaves_weak_components_undescribed():
    solution = vector_dr(1.0, [1.0, 0.25])
    assert solution.mu == pytest.approx(0.5)
    assert solution.per_component_distortion == pytest.approx([0.5, 0.25])
    assert solution.distortion == pytest.approx(0.75)


def test_vector_rd_worked_instance():
    assert vector_rd(0.75, [1.0, 0.25]) == pytest.approx(1.0, abs=1e-12)
    assert vector_rd(1.25, [1.0, 0.25]) == 0.0


def test_rate_distortion_round_trip():
    gen = np.random.default_rng(5)
    for _ in range(20):
        spectrum = gen.uniform(0.05, 3.0, size=int(gen.integers(1, 7)))
        for rate in (0.0, 0.1, 1.0, 5.0, 20.0):
            distortion = vector_dr(rate, spectrum).distortion
            assert vector_rd(distortion, spectrum) == pytest.approx(rate, abs=1e-9)


def test_vector_rd_domain():
    with pytest.raises(DomainError):
        vector_rd(0.0, [1.0])
    with pytest.raises(DomainError):
        vector_rd(2.0, [1.0])
    with pytest.raises(DomainError):
        vector_dr(1.0, [1.0, 0.0])


def test_hamming_distortions():
    assert hamming_expected(0.9, 0.1, 0.5) == pytest.approx(0.1)
    assert hamming_unweighted(0.9, 0.1) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        hamming_expected(1.2, 0.1, 0.5)
    with pytest.raises(DomainError):
        hamming_unweighted(0.5, -0.1)


def test_vector_functions_are_nonincreasing_and_convex():
    lambdas = np.array([2.0, 1.0, 0.5, 0.1])
    rates = np.linspace(0.0, 8.0, 41)
    distortions = np.array([vector_dr(rate, lambdas).distortion for rate in rates])
    assert np.all(np.diff(distortions) <= 1e-12)
    assert np.all(distortions[1:-1] <= (distortions[:-2] + distortions[2:]) / 2 + 1e-9)

    grid = np.linspace(0.05, lambdas.sum(), 41)
    needed = np.array([vector_rd(D, lambdas) for D in grid])
    assert np.all(np.diff(needed) <= 1e-12)
    assert np.all(needed[1:-1] <= (needed[:-2] + needed[2:]) / 2 + 1e-9)
