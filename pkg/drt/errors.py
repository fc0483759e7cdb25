"""
Exception hierarchy shared by the `drt` package and the command-line tools.

Every error raised on purpose by the library derives from `DrtError`, so the
CLI can translate it into one of its documented exit codes.
"""

import numpy as np

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_FAILURE = 3


class DrtError(Exception):
    """Base class of all library errors."""

    exit_code = EXIT_NUMERIC_FAILURE


class ConfigurationError(DrtError, ValueError):
    """Inconsistent scenario, scheme or config file."""

    exit_code = EXIT_CONFIG_ERROR


class UnsupportedStructureError(ConfigurationError):
    """The closed-form covariance solver does not cover this prior."""


class DomainError(DrtError, ValueError):
    """An argument lies outside the domain of a mathematical function."""


class NumericFailure(DrtError, ArithmeticError):
    """A factorization or decomposition failed beyond its fallback."""


def exit_code_for(error):
    """
    Map an exception to the CLI exit code.

    Args:
        error (BaseException): The exception caught by the CLI.

    Returns:
        int: 2 for configuration problems, 3 for numeric problems.
    """
    if isinstance(error, DrtError):
        return error.exit_code
    if isinstance(error, np.linalg.LinAlgError):
        return EXIT_NUMERIC_FAILURE
    if isinstance(error, (OSError, ValueError, KeyError)):
        return EXIT_CONFIG_ERROR
    return EXIT_NUMERIC_FAILURE
