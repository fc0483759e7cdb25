import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_pd
from drt.covopt import (
    check_achievability,
    kronecker_factor,
    optimize_cov_pg,
    sensing_optimal_cov_closed,
    solve_sensing_cov,
    waterfill,
    waterfill_mi,
    waterfill_mmse,
)
from drt.errors import ConfigurationError, DomainError, UnsupportedStructureError
from drt.infomeasures import build_fblocks
from drt.model import Scenario


def test_waterfill_worked_instance():
    solution = waterfill([1.0, 0.25], 1, 1.0, 1.0)
    assert solution.gamma == pytest.approx(2.0)
    assert_allclose(solution.betas, [1.0, 0.0], atol=1e-12)
    assert waterfill_mi([1.0, 0.25], solution.betas, 1, 1.0) == pytest.approx(1.0)
    assert waterfill_mmse([1.0, 0.25], solution.betas, 1, 1.0) == pytest.approx(0.75)


def test_waterfill_spends_budget():
    solution = waterfill([3.0, 1.0, 0.2], 2, 0.5, 4.0)
    assert solution.betas.sum() == pytest.approx(4.0)
    active = solution.betas > 0
    levels = solution.betas[active] + 0.5 / (2 * np.array([3.0, 1.0, 0.2])[active])
    assert_allclose(levels, solution.gamma)


def test_waterfill_edge_cases():
    assert_allclose(waterfill([1.0, 2.0], 1, 1.0, 0.0).betas, [0.0, 0.0])
    with pytest.raises(DomainError):
        waterfill([1.0, 0.0], 1, 1.0, 1.0)


def test_closed_form_worked_instance(worked_scenario):
    result = sensing_optimal_cov_closed(worked_scenario)
    assert result.mi_bits == pytest.approx(1.0)
    assert result.iterations == 0
    assert_allclose(result.R_star, np.diag([1.0, 0.0]), atol=1e-12)


def test_closed_form_white_prior_is_isotropic(trm_scenario):
    result = sensing_optimal_cov_closed(trm_scenario)
    assert_allclose(result.R_star, np.eye(2) / 2, atol=1e-12)


def test_closed_form_rejects_unsupported_prior(gen):
    scn = Scenario(M=2, N_s=2, N_c=1, T=2, P_T=1.0, sigma_s2=1.0, sigma_c2=1.0,
                   R_h=random_pd(gen, 4))
    assert kronecker_factor(scn.R_h, 2, 2) is None
    with pytest.raises(UnsupportedStructureError):
        sensing_optimal_cov_closed(scn)


def test_kronecker_factor_found(kron_scenario):
    A = kronecker_factor(kron_scenario.R_h, 2, 2)
    assert_allclose(A, [[1.0, 0.5], [0.5, 1.0]])


def test_projected_gradient_matches_closed_form(gen):
    for _ in range(20):
        M = int(gen.integers(1, 4))
        T = int(gen.integers(1, 5))
        scn = Scenario(
            M=M, N_s=1, N_c=1, T=T, P_T=float(gen.uniform(0.5, 3.0)),
            sigma_s2=float(gen.uniform(0.5, 2.0)), sigma_c2=1.0,
            R_h=random_pd(gen, M),
        )
        fb = build_fblocks(scn.R_h, 1, M)
        closed = sensing_optimal_cov_closed(scn, fb)
        iterative = optimize_cov_pg(fb, scn.T, scn.sigma_s2, scn.P_T)
        assert iterative.converged
        assert iterative.mi_bits == pytest.approx(closed.mi_bits, abs=1e-6)


def test_projected_gradient_on_kronecker_prior(kron_scenario):
    closed = sensing_optimal_cov_closed(kron_scenario)
    fb = build_fblocks(kron_scenario.R_h, 2, 2)
    iterative = optimize_cov_pg(fb, 2, 0.5, 2.0)
    assert iterative.mi_bits == pytest.approx(closed.mi_bits, abs=1e-6)
    assert np.trace(iterative.R_star).real == pytest.approx(2.0)


def test_projected_gradient_history_is_nondecreasing(gen):
    fb = build_fblocks(random_pd(gen, 6), 2, 3)
    result = optimize_cov_pg(fb, 3, 0.4, 2.0)
    assert np.all(np.diff(result.history) >= -1e-12)
    assert result.kkt_residual < 1e-3
    with pytest.raises(DomainError):
        optimize_cov_pg(fb, 3, 0.4, 0.0)


@pytest.mark.parametrize("fixture", ["worked_scenario", "trm_scenario", "kron_scenario"])
def test_closed_form_attains_bound(fixture, request):
    scn = request.getfixturevalue(fixture)
    fb = build_fblocks(scn.R_h, scn.N_s, scn.M)
    result = sensing_optimal_cov_closed(scn, fb)
    report = check_achievability(result.R_star, fb, scn.T, scn.sigma_s2, scn.P_T)
    assert report.achieved()


def test_isotropic_cov_misses_bound(worked_scenario):
    fb = build_fblocks(worked_scenario.R_h, 1, 2)
    report = check_achievability(np.eye(2) / 2, fb, 1, 1.0, 1.0)
    assert report.waterfill_deviation > 0.1
    assert not report.achieved()


def test_solve_sensing_cov_dispatch(gen, worked_scenario):
    auto = solve_sensing_cov(worked_scenario)
    assert auto.iterations == 0

    scn = Scenario(M=2, N_s=2, N_c=1, T=2, P_T=1.0, sigma_s2=1.0, sigma_c2=1.0,
                   R_h=random_pd(gen, 4))
    assert solve_sensing_cov(scn).iterations > 0
    with pytest.raises(UnsupportedStructureError):
        solve_sensing_cov(scn, method="wf")
    with pytest.raises(ConfigurationError):
        solve_sensing_cov(scn, method="newton")

    idle = Scenario(M=2, N_s=2, N_c=1, T=2, P_T=0.0, sigma_s2=1.0, sigma_c2=1.0,
                    R_h=scn.R_h)
    assert_allclose(solve_sensing_cov(idle).R_star, np.zeros((2, 2)))


def test_waterfill_beats_random_feasible_powers(gen):
    T, sigma_s2, budget = 3, 0.7, 1.5
    for _ in range(5):
        lambdas = np.sort(gen.uniform(0.05, 2.0, 4))[::-1]
        betas = waterfill(lambdas, T, sigma_s2, budget).betas
        best = waterfill_mi(lambdas, betas, T, sigma_s2)
        for candidate in budget * gen.dirichlet(np.ones(4), 100):
            assert waterfill_mi(lambdas, candidate, T, sigma_s2) <= best + 1e-12
