"""
The `drt` package computes the deterministic-random tradeoff of integrated
sensing and communications: sensing mutual information and MMSE, Gaussian
rate-distortion bounds, sensing-optimal covariances, communication rates and
the verification suites tying them together.

Modules:
    - errors: Exception hierarchy and exit codes.
    - numkit: Complex linear-algebra primitives.
    - model: Scenario, signaling schemes, channels and seeded streams.
    - infomeasures: Sensing mutual information and its gradient.
    - ratedistortion: Gaussian rate-distortion functions.
    - estimation: Posterior means, MMSE and empirical MSE.
    - covopt: Sensing-optimal covariance.
    - capacity: Communication rates.
    - experiments: Verification suites and the tradeoff curve.
"""

# drt/__init__.py

__all__ = [
    "errors",
    "numkit",
    "model",
    "infomeasures",
    "ratedistortion",
    "estimation",
    "covopt",
    "capacity",
    "experiments",
]
