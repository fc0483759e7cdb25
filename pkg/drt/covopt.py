"""
Sensing-optimal signal covariance: maximize I(R) over {R ⪰ 0, tr R = P_T}.

Two solvers are provided:
    - a closed form by water-filling for priors whose structure pins the
      optimal eigenbasis (a single sensing antenna, or R_h = A ⊗ I_{N_s});
    - projected gradient ascent with Armijo backtracking for any PD prior.

`check_achievability` reports how far a covariance is from the conditions
under which the vector MSE lower bound is attained.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from helpers.config import (
    BISECT_MAXITER,
    BISECT_RTOL,
    PG_ARMIJO,
    PG_BACKTRACK,
    PG_MAX_HALVINGS,
    PG_MAX_ITER,
    PG_REL_TOL,
    PG_STEP_INIT,
    STRUCTURE_RTOL,
)

from .errors import ConfigurationError, DomainError, UnsupportedStructureError
from .infomeasures import build_fblocks, mi_given_cov_nats, mi_gradient
from .numkit import (
    LOG2E,
    check_psd,
    eigvalsh_desc,
    hermitian_eig,
    hermitian_part,
    project_psd_trace,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WaterfillSolution:
    """
    Transmit water-filling β_i = (γ − σ_s^2/(T λ_i))⁺.

    Attributes:
        gamma (float): Water level γ.
        betas (ndarray): Powers β_i, aligned with the input eigenvalues.
        budget (float): Σ β_i.
    """

    gamma: float
    betas: np.ndarray
    budget: float


@dataclass(frozen=True, eq=False)
class OptimizerResult:
    """
    A sensing covariance and its figures of merit.

    Attributes:
        R_star (ndarray): PSD covariance with trace P_T.
        mi_bits (float): I(R_star).
        iterations (int): Projected-gradient iterations (0 for closed forms).
        kkt_residual (float): ‖R − Proj(R + G)‖_F with G the gradient in nats.
        converged (bool): Whether the stopping rule was met.
        history (tuple): MI in bits after each iteration.
    """

    R_star: np.ndarray
    mi_bits: float
    iterations: int
    kkt_residual: float
    converged: bool
    history: tuple = field(default=())


@dataclass(frozen=True)
class PGOptions:
    """Projected-gradient settings."""

    step_init: float = PG_STEP_INIT
    backtrack: float = PG_BACKTRACK
    armijo: float = PG_ARMIJO
    max_halvings: int = PG_MAX_HALVINGS
    max_iter: int = PG_MAX_ITER
    rel_tol: float = PG_REL_TOL


@dataclass(frozen=True)
class AchievabilityReport:
    """
    Residuals of the conditions under which the vector bound is attained.

    Attributes:
        alignment_residual (float): ‖S Λ_h − Λ_h S‖_max, scaled; zero iff
                                    S and Λ_h are simultaneously unitarily
                                    diagonalizable.
        waterfill_deviation (float): Max gap between eig(S) and the
                                     water-filled spectrum, both descending.
        trace_residual (float): |Σ eig(S) − N_s P_T|.
    """

    alignment_residual: float
    waterfill_deviation: float
    trace_residual: float

    def achieved(self, tol=1e-8):
        """True when every residual is within `tol`."""
        return max(
            self.alignment_residual, self.waterfill_deviation, self.trace_residual
        ) <= tol


def waterfill(lambdas, T, sigma_s2, budget):
    """
    Allocate `budget` over gains λ_i to maximize Σ log2(1 + σ_s^{-2} T λ_i β_i).

    Args:
        lambdas (array_like): Positive gains.
        T (int): Block length.
        sigma_s2 (float): Noise variance.
        budget (float): Nonnegative total power.

    Returns:
        WaterfillSolution: Water level and powers in input order.
    """
    gains = np.asarray(lambdas, dtype=float)
    if gains.size == 0 or np.any(gains <= 0.0):
        raise DomainError("water-filling gains must be positive")
    if budget < 0.0:
        raise DomainError(f"budget must be nonnegative, got {budget}")

    floors = sigma_s2 / (T * gains)
    lowest = float(floors.min())
    if budget == 0.0:
        return WaterfillSolution(lowest, np.zeros_like(gains), 0.0)

    def excess(gamma):
        return float(np.sum(np.maximum(gamma - floors, 0.0))) - budget

    gamma = bisect(
        excess, lowest, lowest + budget,
        xtol=1e-15 * (lowest + budget), rtol=BISECT_RTOL, maxiter=BISECT_MAXITER
    )
    betas = np.maximum(gamma - floors, 0.0)
    return WaterfillSolution(gamma, betas, float(betas.sum()))


def waterfill_mi(lambdas, betas, T, sigma_s2):
    """Σ log2(1 + σ_s^{-2} T λ_i β_i)."""
    lambdas = np.asarray(lambdas, dtype=float)
    return float(np.sum(np.log2(1.0 + T * lambdas * np.asarray(betas) / sigma_s2)))


def waterfill_mmse(lambdas, betas, T, sigma_s2):
    """Σ λ_i / (1 + σ_s^{-2} T λ_i β_i)."""
    lambdas = np.asarray(lambdas, dtype=float)
    return float(np.sum(lambdas / (1.0 + T * lambdas * np.asarray(betas) / sigma_s2)))


def kronecker_factor(R_h, N_s, M):
    """
    Return A when R_h = A ⊗ I_{N_s} within tolerance, else None.

    With vec(H_s) stacking the N_s x M matrix by columns, A[m, m'] is the
    common diagonal of the N_s x N_s block (m, m') of R_h.
    """
    R_h = np.asarray(R_h, dtype=complex)
    A = R_h[::N_s, ::N_s]
    scale = max(np.abs(R_h).max(), 1e-300)
    if np.abs(np.kron(A, np.eye(N_s)) - R_h).max() > STRUCTURE_RTOL * scale:
        return None
    return A


def _result(R, fb, T, sigma_s2, P_T, iterations=0, converged=True, history=()):
    value = mi_given_cov_nats(R, fb, T, sigma_s2)
    gradient = mi_gradient(R, fb, T, sigma_s2)
    kkt = float(np.linalg.norm(R - project_psd_trace(R + gradient, P_T)))
    return OptimizerResult(
        R_star=R,
        mi_bits=value * LOG2E,
        iterations=iterations,
        kkt_residual=kkt,
        converged=converged,
        history=tuple(history),
    )


def sensing_optimal_cov_closed(scn, fb=None):
    """
    Closed-form sensing-optimal covariance for supported prior structures.

    Case N_s = 1: R_h = U Λ U^H gives R* = conj(U diag(β) U^H).
    Case R_h = A ⊗ I_{N_s}: A = U_A Λ_A U_A^H gives
    R* = conj(U_A diag(β) U_A^H). In both cases β = waterfill(Λ, T, σ_s^2, P_T).

    Args:
        scn (Scenario): Problem instance with P_T > 0.
        fb (FBlockSet, optional): Precomputed blocks of `scn.R_h`.

    Returns:
        OptimizerResult: The optimum with iterations = 0.

    Raises:
        UnsupportedStructureError: If neither structure applies; use
                                   `optimize_cov_pg` instead.
    """
    if scn.N_s == 1:
        factor = scn.R_h
    else:
        factor = kronecker_factor(scn.R_h, scn.N_s, scn.M)
        if factor is None:
            raise UnsupportedStructureError(
                "R_h is neither single-antenna nor of the form A ⊗ I_Ns; "
                "use projected gradient (method 'pg')"
            )

    eig = hermitian_eig(factor)
    solution = waterfill(eig.lambdas, scn.T, scn.sigma_s2, scn.P_T)
    R = hermitian_part(((eig.U * solution.betas) @ eig.U.conj().T).conj())
    fb = fb if fb is not None else build_fblocks(scn.R_h, scn.N_s, scn.M)
    return _result(R, fb, scn.T, scn.sigma_s2, scn.P_T)


def optimize_cov_pg(fb, T, sigma_s2, P_T, opts=None):
    """
    Projected gradient ascent of I(R) over {R ⪰ 0, tr R = P_T}.

    Starts at (P_T/M) I. Each iteration backtracks from twice the previously
    accepted step (1.0 at the start) until the Armijo condition
    I(R⁺) >= I(R) + armijo · Re tr(G (R⁺ − R)) holds, R⁺ = Proj(R + t G).
    Stops when the relative MI gain of an iteration drops below `rel_tol`.

    Args:
        fb (FBlockSet): Prior eigen-structure.
        T (int): Block length.
        sigma_s2 (float): Sensing noise variance.
        P_T (float): Positive power budget.
        opts (PGOptions, optional): Solver settings.

    Returns:
        OptimizerResult: `converged` is False when the iteration cap was
                         reached first.
    """
    if P_T <= 0.0:
        raise DomainError(f"power budget must be positive, got {P_T}")
    opts = opts or PGOptions()

    R = (P_T / fb.M) * np.eye(fb.M, dtype=complex)
    value = mi_given_cov_nats(R, fb, T, sigma_s2)
    history = []
    step = opts.step_init / 2.0
    converged = False
    iteration = 0

    for iteration in range(1, opts.max_iter + 1):
        gradient = mi_gradient(R, fb, T, sigma_s2)
        trial = 2.0 * step
        for _ in range(opts.max_halvings):
            candidate = project_psd_trace(R + trial * gradient, P_T)
            candidate_value = mi_given_cov_nats(candidate, fb, T, sigma_s2)
            ascent = float(np.real(np.trace(gradient @ (candidate - R))))
            if candidate_value >= value + opts.armijo * ascent:
                break
            trial *= opts.backtrack
        else:
            # No admissible step: R is stationary up to round-off.
            history.append(value * LOG2E)
            converged = True
            break

        gain = candidate_value - value
        R, value, step = candidate, candidate_value, trial
        history.append(value * LOG2E)
        if gain <= opts.rel_tol * max(abs(value), np.finfo(float).tiny):
            converged = True
            break

    logger.debug(
        "projected gradient: %d iterations, MI %.12f bits, converged=%s",
        iteration, value * LOG2E, converged
    )
    return _result(R, fb, T, sigma_s2, P_T, iteration, converged, history)


def solve_sensing_cov(scn, method="auto", fb=None, opts=None):
    """
    Sensing-optimal covariance by the requested method.

    Args:
        scn (Scenario): Problem instance.
        method (str): "wf" (closed form), "pg" (projected gradient) or
                      "auto" (closed form when supported, else "pg").
        fb (FBlockSet, optional): Precomputed blocks of `scn.R_h`.
        opts (PGOptions, optional): Projected-gradient settings.

    Returns:
        OptimizerResult: The optimum. A zero budget gives R = 0.
    """
    if method not in ("auto", "wf", "pg"):
        raise ConfigurationError(f"unknown optimization method {method!r}")
    fb = fb if fb is not None else build_fblocks(scn.R_h, scn.N_s, scn.M)

    if method == "wf":
        return sensing_optimal_cov_closed(scn, fb)
    if scn.P_T == 0.0:
        zero = np.zeros((scn.M, scn.M), dtype=complex)
        return _result(zero, fb, scn.T, scn.sigma_s2, 0.0)
    if method == "auto":
        try:
            return sensing_optimal_cov_closed(scn, fb)
        except UnsupportedStructureError:
            logger.debug("no closed form for this prior, using projected gradient")
    return optimize_cov_pg(fb, scn.T, scn.sigma_s2, scn.P_T, opts)


def check_achievability(R, fb, T, sigma_s2, P_T):
    """
    Measure how far R is from attaining the vector MSE lower bound.

    With S = Σ_i F_i R F_i^H the report holds: the commutator residual of S
    and Λ_h, the deviation of eig(S) from the water-filled spectrum
    (γ − σ_s^2/(T λ_i))⁺ with budget N_s P_T, and the trace identity
    tr S = N_s P_T.

    Returns:
        AchievabilityReport: The three residuals.
    """
    R = check_psd(R, "R")
    S = fb.congruence(R)
    Lam = np.diag(fb.lambdas)
    scale = max(1.0, np.abs(S).max() * fb.lambdas.max())
    alignment = float(np.abs(S @ Lam - Lam @ S).max() / scale)

    spectrum = eigvalsh_desc(S)
    target = waterfill(fb.lambdas, T, sigma_s2, fb.N_s * P_T).betas
    deviation = float(np.abs(spectrum - np.sort(target)[::-1]).max())

    trace = float(np.sum(spectrum))
    return AchievabilityReport(
        alignment_residual=alignment,
        waterfill_deviation=deviation,
        trace_residual=abs(trace - fb.N_s * P_T),
    )
