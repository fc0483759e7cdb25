"""
This module reads and writes scenario files.

A scenario file has three sections:

    [scenario]   dimensions, powers, noise variances, R_h and optional H_c
    [schemes]    which signaling schemes to test and their covariances
    [run]        seed, trial count, curve points, workers, output paths

Matrices are written either as `identity`, as inline row-major lists of
complex entries `a+bi` (entries separated by `,`, rows by `;`), or as the
path of a `.csv` file of interleaved real,imag columns, relative to the
scenario file. Serialization writes every matrix inline with round-trip
floats, so parsing a serialized configuration gives it back unchanged.
"""

import configparser
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from drt.errors import ConfigurationError
from drt.model import (
    ConstantModulusPSK,
    Deterministic,
    GaussianColored,
    GaussianIID,
    HaarFixedCovariance,
    Scenario,
    deterministic_probe,
)

from .config import (
    DEFAULT_COMM_SAMPLES,
    DEFAULT_POINTS,
    DEFAULT_PSK_ORDER,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
)
from .file_utils import load_complex_csv, read_text

SCENARIO_KEYS = (
    "M", "N_s", "N_c", "T", "P_T", "sigma_s2", "sigma_c2",
    "R_h", "k_coherence", "H_c", "comm_samples",
)
REQUIRED_SCENARIO_KEYS = ("M", "N_s", "N_c", "T", "P_T", "sigma_s2", "sigma_c2")
SCHEME_KEYS = ("names", "psk_order", "colored_cov", "haar_cov", "deterministic_X0")
RUN_KEYS = ("seed", "trials", "points", "jobs", "report", "curve")
SECTIONS = {"scenario": SCENARIO_KEYS, "schemes": SCHEME_KEYS, "run": RUN_KEYS}

SCHEME_NAMES = ("gaussian_iid", "gaussian_colored", "psk", "haar", "deterministic")
SENSING_OPTIMAL = "sensing_optimal"
ISOTROPIC = "isotropic"
IDENTITY = "identity"


def parse_complex(token):
    """
    Parse one `a+bi` entry.

    Args:
        token (str): Entry such as `1`, `-0.5i`, `2.5-1e-3i`.

    Returns:
        complex: The value.

    Raises:
        ConfigurationError: If the entry is not a complex number.
    """
    text = token.strip().replace(" ", "")
    if not text or "j" in text:
        raise ConfigurationError(f"invalid complex entry {token!r}")
    try:
        return complex(text.replace("i", "j"))
    except ValueError as val_err:
        raise ConfigurationError(f"invalid complex entry {token!r}") from val_err


def format_complex(value):
    """Format a complex number as `a+bi` with round-trip floats."""
    value = complex(value)
    sign = "-" if math.copysign(1.0, value.imag) < 0 else "+"
    return f"{value.real!r}{sign}{abs(value.imag)!r}i"


def parse_matrix(text, shape, base_dir="."):
    """
    Parse a matrix value.

    Args:
        text (str): `identity`, an inline matrix or a `.csv` path.
        shape (tuple): Expected (rows, cols).
        base_dir (str): Directory that relative CSV paths start from.

    Returns:
        ndarray: Complex matrix of the expected shape.

    Raises:
        ConfigurationError: On malformed input or a shape mismatch.
    """
    text = text.strip()
    if text == IDENTITY:
        if shape[0] != shape[1]:
            raise ConfigurationError(f"identity needs a square shape, got {shape}")
        matrix = np.eye(shape[0], dtype=complex)
    elif text.endswith(".csv"):
        path = os.path.join(base_dir, text)
        if not os.path.isfile(path):
            raise ConfigurationError(f"matrix file not found: {path}")
        try:
            matrix = load_complex_csv(path)
        except ValueError as val_err:
            raise ConfigurationError(str(val_err)) from val_err
    else:
        rows = [row for row in text.split(";") if row.strip()]
        entries = [[parse_complex(token) for token in row.split(",")] for row in rows]
        if not entries or len({len(row) for row in entries}) != 1:
            raise ConfigurationError(f"ragged or empty matrix {text!r}")
        matrix = np.array(entries, dtype=complex)

    if matrix.shape != tuple(shape):
        raise ConfigurationError(f"expected a {shape[0]}x{shape[1]} matrix, got {matrix.shape}")
    return matrix


def format_matrix(matrix):
    """Inline form of a matrix: rows joined by `;`, entries by `,`."""
    matrix = np.atleast_2d(matrix)
    return "; ".join(
        ", ".join(format_complex(value) for value in row) for row in matrix
    )


def _parse_int(section, key, value):
    try:
        return int(value)
    except ValueError as val_err:
        raise ConfigurationError(f"[{section}] {key} must be an integer") from val_err


def _parse_float(section, key, value):
    try:
        return float(value)
    except ValueError as val_err:
        raise ConfigurationError(f"[{section}] {key} must be a number") from val_err


@dataclass(frozen=True, eq=False)
class SchemeSettings:
    """
    The [schemes] section. Covariances are `sensing_optimal`, `isotropic` or
    an explicit matrix; `names` None selects the schemes that fit the scenario.
    """

    names: tuple = None
    psk_order: int = DEFAULT_PSK_ORDER
    colored_cov: object = field(default=SENSING_OPTIMAL, repr=False)
    haar_cov: object = field(default=SENSING_OPTIMAL, repr=False)
    deterministic_X0: object = field(default=SENSING_OPTIMAL, repr=False)

    def default_names(self, scn):
        names = ["gaussian_iid", "gaussian_colored"]
        if scn.T >= scn.M:
            names += ["haar", "deterministic"]
        if scn.M == scn.T == 1:
            names.append("psk")
        return tuple(names)

    def build(self, scn, sensing_cov, names=None):
        """
        Instantiate the configured schemes.

        Args:
            scn (Scenario): The scenario the schemes are drawn for.
            sensing_cov (callable): Returns the sensing-optimal covariance;
                                    called only when a scheme needs it.
            names (iterable, optional): Override of the configured names.

        Returns:
            list: SignalScheme instances in name order.
        """
        names = tuple(names or self.names or self.default_names(scn))

        def covariance(value):
            if isinstance(value, str):
                if value == SENSING_OPTIMAL:
                    return sensing_cov()
                return (scn.P_T / scn.M) * np.eye(scn.M, dtype=complex)
            return value

        schemes = []
        for name in names:
            if name == "gaussian_iid":
                schemes.append(GaussianIID())
            elif name == "gaussian_colored":
                schemes.append(GaussianColored(covariance(self.colored_cov)))
            elif name == "psk":
                schemes.append(ConstantModulusPSK(self.psk_order))
            elif name == "haar":
                schemes.append(HaarFixedCovariance(covariance(self.haar_cov)))
            elif name == "deterministic":
                X0 = self.deterministic_X0
                if isinstance(X0, str):
                    X0 = deterministic_probe(covariance(X0), scn.T)
                schemes.append(Deterministic(X0))
            else:
                raise ConfigurationError(
                    f"unknown scheme {name!r}; expected one of {', '.join(SCHEME_NAMES)}"
                )

        for scheme in schemes:
            scheme.validate(scn)
        return schemes


@dataclass(frozen=True)
class RunSettings:
    """The [run] section."""

    seed: int = DEFAULT_SEED
    trials: int = DEFAULT_TRIALS
    points: int = DEFAULT_POINTS
    jobs: int = None
    report: str = None
    curve: str = None


@dataclass(frozen=True, eq=False)
class CliConfig:
    """A parsed and validated scenario file."""

    scenario: Scenario
    schemes: SchemeSettings = field(default_factory=SchemeSettings)
    run: RunSettings = field(default_factory=RunSettings)

    @classmethod
    def load(cls, path):
        """
        Read and validate a scenario file.

        Raises:
            ConfigurationError: If the file is missing or invalid.
        """
        if not os.path.isfile(path):
            raise ConfigurationError(f"config file not found: {path}")
        return cls.parse(read_text(path), os.path.dirname(os.path.abspath(path)))

    @classmethod
    def parse(cls, text, base_dir="."):
        """Parse scenario-file text; see the module docstring for the grammar."""
        parser = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#",)
        )
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as cfg_err:
            raise ConfigurationError(f"malformed config: {cfg_err}") from cfg_err

        if parser.defaults():
            raise ConfigurationError("keys outside of a section are not allowed")
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigurationError(f"unknown section [{section}]")
            unknown = set(parser[section]) - set(SECTIONS[section])
            if unknown:
                raise ConfigurationError(
                    f"unknown keys in [{section}]: {', '.join(sorted(unknown))}"
                )
        if not parser.has_section("scenario"):
            raise ConfigurationError("missing [scenario] section")

        scenario = _parse_scenario(parser["scenario"], base_dir)
        schemes = _parse_schemes(
            parser["schemes"] if parser.has_section("schemes") else {},
            scenario, base_dir
        )
        run = _parse_run(parser["run"] if parser.has_section("run") else {})
        return cls(scenario, schemes, run)

    def with_run(self, **overrides):
        """Copy with [run] values replaced by the non-None overrides."""
        values = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, run=replace(self.run, **values))

    def serialize(self):
        """Render the configuration in scenario-file syntax."""
        scn, schemes, run = self.scenario, self.schemes, self.run
        lines = [
            "[scenario]",
            f"M = {scn.M}",
            f"N_s = {scn.N_s}",
            f"N_c = {scn.N_c}",
            f"T = {scn.T}",
            f"P_T = {float(scn.P_T)!r}",
            f"sigma_s2 = {float(scn.sigma_s2)!r}",
            f"sigma_c2 = {float(scn.sigma_c2)!r}",
            f"R_h = {format_matrix(scn.R_h)}",
            f"k_coherence = {scn.k_coherence}",
            f"comm_samples = {scn.comm_samples}",
        ]
        if scn.H_c is not None:
            lines.append(f"H_c = {format_matrix(scn.H_c)}")

        lines += ["", "[schemes]"]
        if schemes.names is not None:
            lines.append(f"names = {', '.join(schemes.names)}")
        lines.append(f"psk_order = {schemes.psk_order}")
        for key in ("colored_cov", "haar_cov", "deterministic_X0"):
            value = getattr(schemes, key)
            text = value if isinstance(value, str) else format_matrix(value)
            lines.append(f"{key} = {text}")

        lines += [
            "",
            "[run]",
            f"seed = {run.seed}",
            f"trials = {run.trials}",
            f"points = {run.points}",
        ]
        for key in ("jobs", "report", "curve"):
            value = getattr(run, key)
            if value is not None:
                lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


def _parse_scenario(section, base_dir):
    missing = [key for key in REQUIRED_SCENARIO_KEYS if key not in section]
    if missing:
        raise ConfigurationError(f"missing keys in [scenario]: {', '.join(missing)}")

    ints = {
        key: _parse_int("scenario", key, section[key])
        for key in ("M", "N_s", "N_c", "T")
    }
    floats = {
        key: _parse_float("scenario", key, section[key])
        for key in ("P_T", "sigma_s2", "sigma_c2")
    }
    for key, value in ints.items():
        if value < 1:
            raise ConfigurationError(f"[scenario] {key} must be a positive integer")

    K_dim = ints["N_s"] * ints["M"]
    R_h = parse_matrix(section.get("R_h", IDENTITY), (K_dim, K_dim), base_dir)
    H_c = None
    if "H_c" in section:
        H_c = parse_matrix(section["H_c"], (ints["N_c"], ints["M"]), base_dir)

    return Scenario(
        **ints,
        **floats,
        R_h=R_h,
        k_coherence=_parse_int("scenario", "k_coherence", section.get("k_coherence", "1")),
        H_c=H_c,
        comm_samples=_parse_int(
            "scenario", "comm_samples",
            section.get("comm_samples", str(DEFAULT_COMM_SAMPLES))
        ),
    )


def _parse_cov_setting(value, shape, base_dir):
    value = value.strip()
    if value in (SENSING_OPTIMAL, ISOTROPIC):
        return value
    return parse_matrix(value, shape, base_dir)


def _parse_schemes(section, scn, base_dir):
    settings = SchemeSettings()
    updates = {}
    if "names" in section:
        names = tuple(name.strip() for name in section["names"].split(",") if name.strip())
        unknown = [name for name in names if name not in SCHEME_NAMES]
        if not names or unknown:
            raise ConfigurationError(
                f"[schemes] names must be drawn from {', '.join(SCHEME_NAMES)}"
            )
        updates["names"] = names
    if "psk_order" in section:
        updates["psk_order"] = _parse_int("schemes", "psk_order", section["psk_order"])
        if updates["psk_order"] < 2:
            raise ConfigurationError("[schemes] psk_order must be at least 2")
    for key in ("colored_cov", "haar_cov"):
        if key in section:
            updates[key] = _parse_cov_setting(section[key], (scn.M, scn.M), base_dir)
    if "deterministic_X0" in section:
        updates["deterministic_X0"] = _parse_cov_setting(
            section["deterministic_X0"], (scn.M, scn.T), base_dir
        )
    return replace(settings, **updates)


def _parse_run(section):
    updates = {}
    for key in ("seed", "trials", "points", "jobs"):
        if key in section:
            updates[key] = _parse_int("run", key, section[key])
    if updates.get("seed", 0) < 0:
        raise ConfigurationError("[run] seed must be nonnegative")
    if updates.get("trials", 2) < 2:
        raise ConfigurationError("[run] trials must be at least 2")
    if updates.get("points", 2) < 2:
        raise ConfigurationError("[run] points must be at least 2")
    if updates.get("jobs", 1) < 1:
        raise ConfigurationError("[run] jobs must be at least 1")
    for key in ("report", "curve"):
        if key in section:
            updates[key] = section[key].strip()
    return RunSettings(**updates)
