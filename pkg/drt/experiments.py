"""
Verification suites and the deterministic-random tradeoff curve.

Each suite returns a `VerificationReport` made of `Check` records. Monte Carlo
comparisons use a margin of `SIGMA_FACTOR` standard errors; closed-form
identities use fixed absolute tolerances. Every random quantity draws from
its own child stream, so reports depend only on the seed.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np

from helpers.config import (
    BLOCK_ATOL,
    DEFAULT_PSK_ORDER,
    IDENTITY_ATOL,
    OPTIMUM_ATOL,
    SIGMA_FACTOR,
)
from helpers.file_utils import write_csv

from .capacity import (
    comm_optimal_cov,
    ergodic_gaussian_rate,
    high_snr_rate,
    psk_rate,
)
from .covopt import (
    optimize_cov_pg,
    sensing_optimal_cov_closed,
    solve_sensing_cov,
    waterfill,
    waterfill_mi,
    waterfill_mmse,
)
from .errors import ConfigurationError, UnsupportedStructureError
from .estimation import (
    empirical_mse,
    scalar_avg_mmse,
    scalar_mmse_given_x,
    vector_mmse_given_X,
    vector_mmse_unrotated,
)
from .infomeasures import (
    build_fblocks,
    ergodic_sensing_mi,
    mi_direct,
    mi_given_cov,
    scalar_mi_max,
)
from .model import (
    ConstantModulusPSK,
    Deterministic,
    GaussianColored,
    GaussianIID,
    HaarFixedCovariance,
    complex_gaussian,
    deterministic_probe,
    sample_comm_channels,
    sample_cov,
)
from .ratedistortion import scalar_dr, scalar_rd, vector_dr, vector_rd

logger = logging.getLogger(__name__)

LE, GE, GT, APPROX = "<=", ">=", ">", "~="

CURVE_COLUMNS = (
    "alpha",
    "scheme",
    "comm_rate_bits",
    "comm_rate_stderr",
    "sensing_mi_bits",
    "sensing_mi_stderr",
    "distortion_bound",
    "empirical_mse",
    "empirical_mse_stderr",
)

IDENTITY_DRAWS = 8


@dataclass(frozen=True)
class Check:
    """
    One comparison `lhs relation rhs` within `tolerance`. For `>` the
    tolerance is a required excess: lhs must exceed rhs by more than it.

    Skipped checks carry no operands and count as passed.
    """

    name: str
    lhs: float
    rhs: float
    relation: str
    tolerance: float
    passed: bool
    note: str = ""

    @classmethod
    def compare(cls, name, lhs, rhs, relation, tolerance, note=""):
        """Evaluate the relation and build the record."""
        lhs, rhs, tolerance = float(lhs), float(rhs), float(tolerance)
        if relation == LE:
            passed = lhs <= rhs + tolerance
        elif relation == GE:
            passed = lhs >= rhs - tolerance
        elif relation == GT:
            passed = lhs - rhs > tolerance
        elif relation == APPROX:
            passed = abs(lhs - rhs) <= tolerance
        else:
            raise ValueError(f"unknown relation {relation!r}")
        passed = bool(passed and np.isfinite(lhs) and np.isfinite(rhs))
        return cls(name, lhs, rhs, relation, tolerance, passed, note)

    @classmethod
    def skipped(cls, name, relation, note):
        """A check that does not apply to the scenario."""
        return cls(name, None, None, relation, 0.0, True, f"skipped: {note}")

    def to_dict(self):
        """JSON-ready mapping with the report field names."""
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "note": self.note,
        }


@dataclass(frozen=True)
class VerificationReport:
    """A suite outcome: scenario summary, seed and checks."""

    scenario: dict
    seed: int
    checks: tuple

    @property
    def passed(self):
        """True when every check passed."""
        return all(check.passed for check in self.checks)

    def failed_checks(self):
        """Names of the checks that did not pass."""
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "checks": [check.to_dict() for check in self.checks],
            "pass": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class TradeoffPoint:
    """One row of the tradeoff curve."""

    alpha: float
    scheme_label: str
    comm_rate_bits: float
    comm_rate_stderr: float
    sensing_mi_bits: float
    sensing_mi_stderr: float
    distortion_bound: float
    empirical_mse: float
    empirical_mse_stderr: float

    def as_row(self):
        """Values in `CURVE_COLUMNS` order."""
        return [
            self.alpha,
            self.scheme_label,
            self.comm_rate_bits,
            self.comm_rate_stderr,
            self.sensing_mi_bits,
            self.sensing_mi_stderr,
            self.distortion_bound,
            self.empirical_mse,
            self.empirical_mse_stderr,
        ]


@dataclass(frozen=True)
class ScalarTradeoffPoint:
    """Communication rate against sensing MSE for one scalar scheme."""

    scheme_label: str
    comm_rate_bits: float
    comm_rate_stderr: float
    sensing_mse: float


def _margin(*estimates):
    """SIGMA_FACTOR times the combined standard error, plus round-off."""
    spread = np.sqrt(sum(estimate.stderr ** 2 for estimate in estimates))
    return SIGMA_FACTOR * float(spread) + IDENTITY_ATOL


def _distortion(mi_bits, lambdas):
    return vector_dr(max(0.0, mi_bits), lambdas).distortion


def _check_scalar(scn):
    if not scn.is_scalar:
        raise ConfigurationError("the scalar suite needs M = T = N_s = N_c = 1")


def verify_scalar(scn, trials, rng, jobs=None, job_progress=None,
                  psk_order=DEFAULT_PSK_ORDER):
    """
    Scalar-signal sensing bounds.

    Checks that constant-modulus signaling attains σ_h² 2^{-I_max}, that
    Gaussian signaling stays above it, that the Gaussian ergodic MI stays
    below I_max and that R_G(average MMSE) does not exceed the ergodic MI.

    Args:
        scn (Scenario): A scalar scenario.
        trials (int): Monte Carlo trials per estimate.
        rng (RngStream): Root stream of the suite.
        jobs (int, optional): Worker threads.
        job_progress (Progress, optional): Rich progress tracker.
        psk_order (int): Constellation size of the constant-modulus scheme.

    Returns:
        VerificationReport: The suite outcome.

    Raises:
        ConfigurationError: If the scenario is not scalar.
    """
    _check_scalar(scn)
    sigma_h2 = scn.sigma_h2
    mi_max = scalar_mi_max(scn.P_T, sigma_h2, scn.sigma_s2)
    bound = scalar_dr(mi_max, sigma_h2)
    psk, gaussian = ConstantModulusPSK(psk_order), GaussianIID()

    psk_mse = empirical_mse(
        psk, scn, trials, rng.child("psk_mse"), jobs, job_progress
    )
    gaussian_mse = empirical_mse(
        gaussian, scn, trials, rng.child("gaussian_mse"), jobs, job_progress
    )
    gaussian_mi = ergodic_sensing_mi(
        gaussian, scn, trials, rng.child("gaussian_mi"), jobs=jobs,
        job_progress=job_progress
    )
    avg_mmse = scalar_avg_mmse(gaussian, scn, method="quadrature").mean
    jensen_gap = gaussian_mse.mean - bound

    checks = (
        Check.compare(
            "prop2_psk_mse", psk_mse.mean, bound, APPROX, _margin(psk_mse),
            "constant modulus attains sigma_h2 * 2^-I_max"
        ),
        Check.compare(
            "gaussian_mse_above_bound", gaussian_mse.mean, bound, GT,
            _margin(gaussian_mse), f"Jensen gap {jensen_gap:.6g}"
        ),
        Check.compare(
            "gaussian_mse_quadrature", gaussian_mse.mean, avg_mmse, APPROX,
            _margin(gaussian_mse), "empirical MSE against quadrature average"
        ),
        Check.compare(
            "gaussian_mi_below_max", gaussian_mi.mean, mi_max, LE,
            _margin(gaussian_mi), "ergodic MI against log2(1 + P_T sigma_h2/sigma_s2)"
        ),
        Check.compare(
            "rate_of_avg_mmse_below_mi", scalar_rd(avg_mmse, sigma_h2),
            gaussian_mi.mean, LE, _margin(gaussian_mi),
            "R_G(E mmse) against ergodic MI"
        ),
    )
    return VerificationReport(scn.summary(), rng.seed, checks)


def _identity_checks(scn, fb, rng):
    """Closed-form identities on random probes."""
    gen = rng.child("identities").generator()
    probes = complex_gaussian(gen, (IDENTITY_DRAWS, scn.M, scn.T))
    eye = np.eye(scn.M)

    mi_gap = mmse_gap = trace_gap = 0.0
    for X in probes:
        R_X = sample_cov(X)
        direct = mi_direct(X, scn.R_h, scn.sigma_s2)
        rotated = mi_given_cov(R_X, fb, scn.T, scn.sigma_s2)
        mi_gap = max(mi_gap, abs(direct - rotated))

        rotated_mmse = vector_mmse_given_X(R_X, fb, scn.T, scn.sigma_s2)
        plain_mmse = vector_mmse_unrotated(R_X, scn.R_h, scn.T, scn.sigma_s2, scn.N_s)
        mmse_gap = max(mmse_gap, abs(rotated_mmse - plain_mmse))

        trace_S = np.trace(fb.congruence(R_X)).real
        trace_R = scn.N_s * np.trace(R_X).real
        trace_gap = max(trace_gap, abs(trace_S - trace_R) / max(1.0, trace_R))

    gram = np.einsum("iam,ian->imn", fb.blocks.conj(), fb.blocks)
    orthonormal_gap = float(np.abs(gram - eye).max())

    return [
        Check.compare(
            "mi_rotated_matches_direct", mi_gap, 0.0, LE, IDENTITY_ATOL,
            f"max gap over {IDENTITY_DRAWS} probes, bits"
        ),
        Check.compare(
            "mmse_rotated_matches_direct", mmse_gap, 0.0, LE, IDENTITY_ATOL,
            f"max gap over {IDENTITY_DRAWS} probes"
        ),
        Check.compare(
            "fblocks_orthonormal", orthonormal_gap, 0.0, LE, BLOCK_ATOL,
            "max |F_i^H F_i - I|"
        ),
        Check.compare(
            "fblocks_trace", trace_gap, 0.0, LE, BLOCK_ATOL,
            "relative |sum tr(F_i R F_i^H) - N_s tr R|"
        ),
    ]


def _optimum_checks(scn, fb):
    """
    Closed form against projected gradient.

    Returns:
        tuple: (checks, optimum, closed), `closed` telling whether the
               optimum comes from the closed form.
    """
    if scn.P_T == 0.0:
        optimum = solve_sensing_cov(scn, fb=fb)
        skipped = Check.skipped("closed_form_matches_pg", APPROX, "P_T = 0")
        return [skipped], optimum, False

    try:
        closed_form = sensing_optimal_cov_closed(scn, fb)
    except UnsupportedStructureError as structure_err:
        optimum = optimize_cov_pg(fb, scn.T, scn.sigma_s2, scn.P_T)
        skipped = Check.skipped("closed_form_matches_pg", APPROX, str(structure_err))
        return [skipped], optimum, False

    iterative = optimize_cov_pg(fb, scn.T, scn.sigma_s2, scn.P_T)
    check = Check.compare(
        "closed_form_matches_pg", iterative.mi_bits, closed_form.mi_bits, APPROX,
        OPTIMUM_ATOL, f"projected gradient: {iterative.iterations} iterations"
    )
    return [check], closed_form, True


def _waterfill_checks(scn, fb, optimum, closed):
    """
    Rate of the water-filled MMSE equals the water-filled MI. At a closed-form
    optimum the same holds for the MMSE of R* itself; otherwise the rate is
    only bounded by the MI.
    """
    budget = scn.N_s * scn.P_T
    betas = waterfill(fb.lambdas, scn.T, scn.sigma_s2, budget).betas
    wf_mmse = waterfill_mmse(fb.lambdas, betas, scn.T, scn.sigma_s2)
    wf_mi = waterfill_mi(fb.lambdas, betas, scn.T, scn.sigma_s2)

    opt_mmse = vector_mmse_given_X(optimum.R_star, fb, scn.T, scn.sigma_s2)
    relation = APPROX if closed else LE
    return [
        Check.compare(
            "rate_of_waterfilled_mmse", vector_rd(wf_mmse, fb.lambdas), wf_mi,
            APPROX, IDENTITY_ATOL, f"water-filled mmse {wf_mmse:.12g}"
        ),
        Check.compare(
            "rate_of_optimal_mmse_below_mi", vector_rd(opt_mmse, fb.lambdas),
            optimum.mi_bits, relation, IDENTITY_ATOL,
            f"mmse at optimum {opt_mmse:.12g}"
        ),
    ]


def default_schemes(scn, R):
    """
    The schemes exercised by the vector suites at covariance R.

    Returns:
        list: i.i.d. and colored Gaussian; Haar and deterministic when
              T >= M; constant-modulus PSK for M = T = 1.
    """
    schemes = [GaussianIID(), GaussianColored(R)]
    if scn.T >= scn.M:
        schemes.append(HaarFixedCovariance(R))
        schemes.append(Deterministic(deterministic_probe(R, scn.T)))
    if scn.M == scn.T == 1:
        schemes.append(ConstantModulusPSK())
    return schemes


def _lower_bound_check(scheme, scn, fb, trials, rng, jobs, job_progress):
    mi = ergodic_sensing_mi(
        scheme, scn, trials, rng.child(f"{scheme.label}/mi"), fb, jobs, job_progress
    )
    mse = empirical_mse(
        scheme, scn, trials, rng.child(f"{scheme.label}/mse"), jobs, job_progress
    )
    bound = _distortion(mi.mean, fb.lambdas)
    slack = bound - _distortion(mi.mean + SIGMA_FACTOR * mi.stderr, fb.lambdas)
    return Check.compare(
        f"{scheme.label}_mse_above_distortion_bound", mse.mean, bound, GE,
        _margin(mse) + slack, f"ergodic MI {mi.mean:.6g} bits"
    )


def verify_vector(scn, trials, rng, jobs=None, job_progress=None):
    """
    Vector sensing bounds for the target response matrix.

    Checks the rotated MI and MMSE forms against the direct ones, the
    F-block identities, the closed-form optimum against projected gradient,
    the rate/MI fixed point at the water-filled optimum, that Haar signaling
    at the optimum attains the closed-form MMSE, and that the distortion
    bound stays below the empirical MSE of every default scheme.

    Returns:
        VerificationReport: The suite outcome.
    """
    fb = build_fblocks(scn.R_h, scn.N_s, scn.M)
    checks = _identity_checks(scn, fb, rng)

    optimum_checks, optimum, closed = _optimum_checks(scn, fb)
    checks += optimum_checks
    checks += _waterfill_checks(scn, fb, optimum, closed)

    R_star = optimum.R_star
    if scn.T >= scn.M:
        closed_mmse = vector_mmse_given_X(R_star, fb, scn.T, scn.sigma_s2)
        haar_mse = empirical_mse(
            HaarFixedCovariance(R_star), scn, trials, rng.child("haar_mse"),
            jobs, job_progress
        )
        checks.append(Check.compare(
            "haar_mse_matches_closed_form", haar_mse.mean, closed_mmse, APPROX,
            _margin(haar_mse), "Haar signaling at the sensing optimum"
        ))
    else:
        checks.append(Check.skipped("haar_mse_matches_closed_form", APPROX, "T < M"))

    for scheme in default_schemes(scn, R_star):
        checks.append(_lower_bound_check(
            scheme, scn, fb, trials, rng, jobs, job_progress
        ))

    return VerificationReport(scn.summary(), rng.seed, tuple(checks))


def verify_bounds(scn, schemes, trials, rng, jobs=None, job_progress=None):
    """
    The chain  E‖H − Ĥ‖² ≥ D(E I(R_X)) ≥ D(I(E R_X))  for each scheme.

    The left inequality is tested with the MSE and MI standard errors, the
    right one with D evaluated at Î − 3σ. Schemes with a draw-invariant
    sample covariance must meet the right inequality with equality.

    Args:
        scn (Scenario): Problem instance.
        schemes (list): Signaling schemes to test.
        trials (int): Monte Carlo trials per estimate.
        rng (RngStream): Root stream of the suite.

    Returns:
        VerificationReport: Two or three checks per scheme.
    """
    fb = build_fblocks(scn.R_h, scn.N_s, scn.M)
    checks = []
    for index, scheme in enumerate(schemes):
        name = f"{index}_{scheme.label}"
        stream = rng.child(name)
        mi = ergodic_sensing_mi(
            scheme, scn, trials, stream.child("mi"), fb, jobs, job_progress
        )
        mse = empirical_mse(
            scheme, scn, trials, stream.child("mse"), jobs, job_progress
        )
        mi_stat = mi_given_cov(scheme.statistical_cov(scn), fb, scn.T, scn.sigma_s2)

        ergodic_bound = _distortion(mi.mean, fb.lambdas)
        statistical_bound = _distortion(mi_stat, fb.lambdas)
        optimistic = _distortion(mi.mean + SIGMA_FACTOR * mi.stderr, fb.lambdas)
        pessimistic = _distortion(mi.mean - SIGMA_FACTOR * mi.stderr, fb.lambdas)

        checks.append(Check.compare(
            f"{name}_mse_above_ergodic_bound", mse.mean, ergodic_bound, GE,
            _margin(mse) + (ergodic_bound - optimistic),
            f"gap {mse.mean - ergodic_bound:.6g}"
        ))
        checks.append(Check.compare(
            f"{name}_ergodic_above_statistical_bound", pessimistic,
            statistical_bound, GE, IDENTITY_ATOL,
            f"ergodic MI {mi.mean:.6g} bits, statistical {mi_stat:.6g} bits"
        ))
        if scheme.fixed_sample_cov:
            checks.append(Check.compare(
                f"{name}_statistical_bound_tight", ergodic_bound,
                statistical_bound, APPROX, IDENTITY_ATOL,
                "draw-invariant sample covariance"
            ))

    return VerificationReport(scn.summary(), rng.seed, tuple(checks))


def _rescale(R, P_T):
    R = 0.5 * (R + R.conj().T)
    trace = np.trace(R).real
    return R * (P_T / trace) if trace > 0.0 else R


def drt_curve(scn, n_points, trials, rng, jobs=None, job_progress=None):
    """
    Trace the tradeoff between the communication and sensing optima.

    For α on a uniform grid of [0, 1], R(α) = (1 − α) R_comm + α R_sens
    scaled to trace P_T. Each α yields a "gaussian" row (Gaussian signaling
    with covariance R(α)) and a "haar" row (sample covariance pinned to R(α),
    high-SNR rate on the communication side).

    Args:
        scn (Scenario): Problem instance with T >= M.
        n_points (int): Grid size, at least 2.
        trials (int): Monte Carlo trials per estimate.
        rng (RngStream): Root stream of the curve.

    Returns:
        list: 2 * n_points `TradeoffPoint` rows ordered by α.

    Raises:
        ConfigurationError: If n_points < 2, T < M or the communication
                            channel is zero.
    """
    if n_points < 2:
        raise ConfigurationError("a tradeoff curve needs at least 2 points")
    if scn.T < scn.M:
        raise ConfigurationError("the Haar branch of the curve needs T >= M")

    fb = build_fblocks(scn.R_h, scn.N_s, scn.M)
    channels = sample_comm_channels(scn, scn.comm_samples, rng.child("comm_channels"))
    R_comm = comm_optimal_cov(channels, scn.sigma_c2, scn.P_T)
    R_sens = solve_sensing_cov(scn, fb=fb).R_star

    points = []
    for index, alpha in enumerate(np.linspace(0.0, 1.0, n_points)):
        alpha = float(alpha)
        R = _rescale((1.0 - alpha) * R_comm + alpha * R_sens, scn.P_T)
        stream = rng.child(f"alpha/{index}")

        gaussian = GaussianColored(R)
        rate = ergodic_gaussian_rate(channels, R, scn.sigma_c2)
        mi = ergodic_sensing_mi(
            gaussian, scn, trials, stream.child("gaussian/mi"), fb, jobs, job_progress
        )
        mse = empirical_mse(
            gaussian, scn, trials, stream.child("gaussian/mse"), jobs, job_progress
        )
        points.append(TradeoffPoint(
            alpha, "gaussian", rate.mean, rate.stderr, mi.mean, mi.stderr,
            _distortion(mi.mean, fb.lambdas), mse.mean, mse.stderr
        ))

        haar = HaarFixedCovariance(R)
        high_snr = high_snr_rate(channels, R, scn.sigma_c2, scn.T)
        mi_fixed = mi_given_cov(R, fb, scn.T, scn.sigma_s2)
        mse = empirical_mse(
            haar, scn, trials, stream.child("haar/mse"), jobs, job_progress
        )
        points.append(TradeoffPoint(
            alpha, "haar", high_snr.rate_bits_per_symbol, high_snr.stderr,
            mi_fixed, 0.0, _distortion(mi_fixed, fb.lambdas), mse.mean, mse.stderr
        ))
        logger.debug("alpha %.3f done", alpha)

    return points


def write_curve_csv(points, path):
    """Write tradeoff rows under the `CURVE_COLUMNS` header."""
    write_csv(path, CURVE_COLUMNS, [point.as_row() for point in points])


def scalar_tradeoff(scn, orders, trials, rng, jobs=None):
    """
    Scalar tradeoff between PSK of each order and Gaussian signaling.

    PSK reaches the sensing bound with a constellation-limited rate; Gaussian
    signaling reaches log2(1 + SNR) with the larger average MMSE.

    Args:
        scn (Scenario): A scalar scenario.
        orders (iterable): PSK orders.
        trials (int): Monte Carlo trials of the PSK rates.
        rng (RngStream): Root stream.

    Returns:
        list: One `ScalarTradeoffPoint` per order, then the Gaussian point.
    """
    _check_scalar(scn)
    gain = 1.0 if scn.H_c is None else float(abs(scn.H_c[0, 0]) ** 2)
    snr = scn.P_T * gain / scn.sigma_c2
    sensing_bound = scalar_mmse_given_x(scn.P_T, scn.sigma_h2, scn.sigma_s2)

    points = []
    for order in orders:
        rate = psk_rate(order, snr, trials, rng.child(f"psk/{order}"), jobs)
        points.append(ScalarTradeoffPoint(
            f"psk{order}", rate.mean, rate.stderr, sensing_bound
        ))

    gaussian_mse = scalar_avg_mmse(GaussianIID(), scn, method="quadrature").mean
    points.append(ScalarTradeoffPoint(
        "gaussian", float(np.log2(1.0 + snr)), 0.0, gaussian_mse
    ))
    return points


def verify_all(scn, schemes, trials, rng, jobs=None, job_progress=None,
               psk_order=DEFAULT_PSK_ORDER):
    """
    Run every suite that applies to the scenario.

    Returns:
        dict: Suite name to `VerificationReport`; "scalar" only for scalar
              scenarios.
    """
    reports = {}
    if scn.is_scalar:
        reports["scalar"] = verify_scalar(
            scn, trials, rng.child("scalar"), jobs, job_progress, psk_order
        )
    reports["vector"] = verify_vector(
        scn, trials, rng.child("vector"), jobs, job_progress
    )
    reports["bounds"] = verify_bounds(
        scn, schemes, trials, rng.child("bounds"), jobs, job_progress
    )
    return reports
