"""
This module defines the ISAC scenario, the signaling schemes the transmitter
may draw its dual-functional signal from, seeded random streams, and the
forward sensing and communication channels

    Y_s = H_s X + Z_s,        Y_c = H_c X + Z_c.

Complex Gaussian draws follow the circularly-symmetric convention: real and
imaginary parts are independent, each with half of the stated variance.
Every sampler has a batched form that returns a leading trial axis; the
Monte Carlo code works on those batches.
"""

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from helpers.config import (
    DEFAULT_COMM_SAMPLES,
    DEFAULT_PSK_ORDER,
    PD_RTOL,
    TRACE_RTOL,
)

from .errors import ConfigurationError, DomainError
from .numkit import check_hermitian, hermitian_eig, kron, psd_sqrt, unvec


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Problem dimensions, powers, noise variances and the target prior.

    Attributes:
        M (int): Transmit antennas.
        N_s (int): Sensing-receiver antennas.
        N_c (int): Communication-receiver antennas.
        T (int): Samples per block.
        P_T (float): Average transmit power (linear).
        sigma_s2 (float): Sensing noise variance.
        sigma_c2 (float): Communication noise variance.
        R_h (ndarray): Prior covariance of vec(H_s), N_s*M x N_s*M, PD.
        k_coherence (int): Communication coherence multiple (metadata only).
        H_c (ndarray, optional): Fixed N_c x M communication channel; i.i.d.
                                 Rayleigh draws are used when absent.
        comm_samples (int): Number of Rayleigh channel draws for averages.
    """

    M: int
    N_s: int
    N_c: int
    T: int
    P_T: float
    sigma_s2: float
    sigma_c2: float
    R_h: np.ndarray = field(repr=False)
    k_coherence: int = 1
    H_c: np.ndarray = field(default=None, repr=False)
    comm_samples: int = DEFAULT_COMM_SAMPLES

    def __post_init__(self):
        for name in ("M", "N_s", "N_c", "T", "k_coherence", "comm_samples"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer")

        if not self.P_T >= 0.0 or not np.isfinite(self.P_T):
            raise ConfigurationError("P_T must be a finite nonnegative power")
        if not (self.sigma_s2 > 0.0 and self.sigma_c2 > 0.0):
            raise ConfigurationError("noise variances must be positive")

        R_h = np.asarray(self.R_h, dtype=complex)
        if R_h.shape != (self.K_dim, self.K_dim):
            raise ConfigurationError(
                f"R_h must be {self.K_dim}x{self.K_dim} (N_s*M), "
                f"got {R_h.shape}"
            )
        try:
            R_h = check_hermitian(R_h, "R_h")
            lambdas = hermitian_eig(R_h).lambdas
        except DomainError as dom_err:
            raise ConfigurationError(str(dom_err)) from dom_err
        if lambdas[-1] <= PD_RTOL * lambdas[0] or lambdas[0] <= 0.0:
            raise ConfigurationError("R_h must be positive definite")
        object.__setattr__(self, "R_h", R_h)

        if self.H_c is not None:
            H_c = np.asarray(self.H_c, dtype=complex)
            if H_c.shape != (self.N_c, self.M):
                raise ConfigurationError(
                    f"H_c must be {self.N_c}x{self.M}, got {H_c.shape}"
                )
            object.__setattr__(self, "H_c", H_c)

    @property
    def K_dim(self):
        """Parameter dimension N_s*M of eta = vec(H_s)."""
        return self.N_s * self.M

    @property
    def is_scalar(self):
        """True for M = T = N_s = N_c = 1."""
        return self.M == self.T == self.N_s == self.N_c == 1

    @property
    def sigma_h2(self):
        """Prior variance of a scalar target."""
        return float(self.R_h[0, 0].real)

    def summary(self):
        """JSON-friendly description used in reports."""
        return {
            "M": self.M,
            "N_s": self.N_s,
            "N_c": self.N_c,
            "T": self.T,
            "P_T": self.P_T,
            "sigma_s2": self.sigma_s2,
            "sigma_c2": self.sigma_c2,
            "k_coherence": self.k_coherence,
            "R_h_trace": float(np.trace(self.R_h).real),
        }


@dataclass(frozen=True)
class RngStream:
    """
    A reproducible source of random generators.

    Identical (seed, stream_id) pairs give identical draws. Independent
    sub-computations use `child` streams; Monte Carlo blocks use
    `generator(block)`.
    """

    seed: int
    stream_id: int = 0

    def generator(self, *keys):
        """Return a PCG64 generator for the spawn key (stream_id, *keys)."""
        sequence = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, *keys)
        )
        return np.random.Generator(np.random.PCG64(sequence))

    def child(self, label):
        """Derive an independent stream from a string or integer label."""
        digest = hashlib.sha256(f"{self.stream_id}/{label}".encode()).digest()
        return RngStream(self.seed, int.from_bytes(digest[:8], "little"))


def complex_gaussian(gen, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian array with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))


def haar_semi_unitary(gen, count, rows, cols):
    """
    Draw `count` Haar-distributed rows x cols matrices with orthonormal
    columns (rows >= cols).

    The Q factor of a complex Gaussian matrix is made unique by absorbing
    the phases of the R factor's diagonal.
    """
    gaussian = complex_gaussian(gen, (count, rows, cols))
    Q, R = np.linalg.qr(gaussian)
    diagonal = np.diagonal(R, axis1=-2, axis2=-1)
    magnitude = np.abs(diagonal)
    safe = np.where(magnitude > 0.0, magnitude, 1.0)
    phases = np.where(magnitude > 0.0, diagonal / safe, 1.0)
    return Q * phases[:, None, :]


def _check_cov(R, scn, name):
    """Validate a scheme covariance: PSD, M x M, trace P_T."""
    R = np.asarray(R, dtype=complex)
    if R.shape != (scn.M, scn.M):
        raise ConfigurationError(f"{name} covariance must be {scn.M}x{scn.M}")
    try:
        root = psd_sqrt(R, f"{name} covariance")
    except DomainError as dom_err:
        raise ConfigurationError(str(dom_err)) from dom_err
    trace = np.trace(R).real
    if abs(trace - scn.P_T) > TRACE_RTOL * max(1.0, scn.P_T):
        raise ConfigurationError(
            f"{name} covariance has trace {trace:.12g}, expected P_T={scn.P_T}"
        )
    return root


class SignalScheme(ABC):
    """
    A distribution of the M x T dual-functional signal X.

    Subclasses implement batched sampling and report their statistical
    covariance E{R_X} analytically.
    """

    label = "scheme"
    fixed_sample_cov = False

    def validate(self, scn):
        """Raise ConfigurationError when the scheme does not fit `scn`."""

    @abstractmethod
    def sample_batch(self, scn, gen, count):
        """Return `count` draws as an array of shape (count, M, T)."""

    @abstractmethod
    def statistical_cov(self, scn):
        """Return E{R_X}, the statistical covariance of the scheme."""


class GaussianIID(SignalScheme):
    """I.i.d. CN(0, P_T/M) entries."""

    label = "gaussian_iid"

    def sample_batch(self, scn, gen, count):
        return complex_gaussian(gen, (count, scn.M, scn.T), scn.P_T / scn.M)

    def statistical_cov(self, scn):
        return (scn.P_T / scn.M) * np.eye(scn.M, dtype=complex)


@dataclass(eq=False)
class GaussianColored(SignalScheme):
    """Columns i.i.d. CN(0, R) with tr R = P_T."""

    R: np.ndarray = field(repr=False)
    label = "gaussian_colored"

    def validate(self, scn):
        _check_cov(self.R, scn, self.label)

    def sample_batch(self, scn, gen, count):
        root = _check_cov(self.R, scn, self.label)
        return root @ complex_gaussian(gen, (count, scn.M, scn.T))

    def statistical_cov(self, scn):
        return np.asarray(self.R, dtype=complex)


@dataclass(eq=False)
class ConstantModulusPSK(SignalScheme):
    """Single PSK symbol sqrt(P_T) e^{j 2 pi u / order}; needs M = T = 1."""

    order: int = DEFAULT_PSK_ORDER
    label = "psk"
    fixed_sample_cov = True

    def validate(self, scn):
        if self.order < 2:
            raise ConfigurationError("PSK order must be at least 2")
        if scn.M != 1 or scn.T != 1:
            raise ConfigurationError("PSK signaling requires M = T = 1")

    def sample_batch(self, scn, gen, count):
        self.validate(scn)
        symbols = gen.integers(0, self.order, size=count)
        phases = np.exp(2j * np.pi * symbols / self.order)
        return (np.sqrt(scn.P_T) * phases).reshape(count, 1, 1)

    def statistical_cov(self, scn):
        return np.array([[scn.P_T]], dtype=complex)


@dataclass(eq=False)
class HaarFixedCovariance(SignalScheme):
    """
    X = sqrt(T) R^{1/2} Q^H with Q a Haar T x M semi-unitary matrix, so that
    T^{-1} X X^H = R on every draw; needs T >= M.
    """

    R: np.ndarray = field(repr=False)
    label = "haar"
    fixed_sample_cov = True

    def validate(self, scn):
        if scn.T < scn.M:
            raise ConfigurationError("Haar signaling requires T >= M")
        _check_cov(self.R, scn, self.label)

    def sample_batch(self, scn, gen, count):
        self.validate(scn)
        root = _check_cov(self.R, scn, self.label)
        Q = haar_semi_unitary(gen, count, scn.T, scn.M)
        return np.sqrt(scn.T) * (root @ Q.conj().swapaxes(-1, -2))

    def statistical_cov(self, scn):
        return np.asarray(self.R, dtype=complex)


@dataclass(eq=False)
class Deterministic(SignalScheme):
    """A fixed probe X0 of shape M x T."""

    X0: np.ndarray = field(repr=False)
    label = "deterministic"
    fixed_sample_cov = True

    def validate(self, scn):
        if np.shape(self.X0) != (scn.M, scn.T):
            raise ConfigurationError(f"X0 must be {scn.M}x{scn.T}")

    def sample_batch(self, scn, gen, count):
        self.validate(scn)
        X0 = np.asarray(self.X0, dtype=complex)
        return np.broadcast_to(X0, (count, scn.M, scn.T)).copy()

    def statistical_cov(self, scn):
        return sample_cov(np.asarray(self.X0, dtype=complex))


def sample_signal(scheme, scn, rng):
    """
    Draw one M x T signal block from `scheme`.

    Args:
        scheme (SignalScheme): The signaling distribution.
        scn (Scenario): The scenario fixing M, T and P_T.
        rng (RngStream): Source of randomness.

    Returns:
        ndarray: The M x T signal.

    Raises:
        ConfigurationError: If the scheme does not fit the scenario.
    """
    scheme.validate(scn)
    return scheme.sample_batch(scn, rng.generator(), 1)[0]


def sample_cov(X):
    """Sample covariance T^{-1} X X^H (works on stacks of signals)."""
    X = np.asarray(X)
    T = X.shape[-1]
    R = X @ X.conj().swapaxes(-1, -2) / T
    return 0.5 * (R + R.conj().swapaxes(-1, -2))


def lift(X, N_s):
    """Vectorized sensing operator X^T ⊗ I_{N_s}, of shape T*N_s x M*N_s."""
    return kron(np.asarray(X).T, np.eye(N_s))


def lift_batch(X, N_s):
    """`lift` applied to a stack of signals of shape (count, M, T)."""
    count, M, T = X.shape
    lifted = np.einsum("bmt,ac->btamc", X, np.eye(N_s))
    return lifted.reshape(count, T * N_s, M * N_s)


def deterministic_probe(R, T):
    """
    Build an M x T probe X0 with T^{-1} X0 X0^H = R.

    Args:
        R (ndarray): PSD covariance of dimension M <= T.
        T (int): Block length.

    Returns:
        ndarray: sqrt(T) R^{1/2} [I_M, 0].
    """
    M = np.shape(R)[0]
    if T < M:
        raise ConfigurationError("a probe with a given covariance needs T >= M")
    selector = np.eye(M, T, dtype=complex)
    return np.sqrt(T) * psd_sqrt(R) @ selector


def sample_targets(scn, gen, count):
    """
    Draw `count` targets h_s ~ CN(0, R_h).

    Returns:
        tuple: (h, H) with h of shape (count, N_s*M) and H the matching
               N_s x M matrices, shape (count, N_s, M).
    """
    root = psd_sqrt(scn.R_h, "R_h")
    h = complex_gaussian(gen, (count, scn.K_dim)) @ root.T
    H = h.reshape(count, scn.M, scn.N_s).swapaxes(-1, -2)
    return h, H


def sample_target(scn, rng):
    """Draw one target; returns (h_s, H_s) with H_s = unvec(h_s)."""
    h, _ = sample_targets(scn, rng.generator(), 1)
    return h[0], unvec(h[0], scn.N_s, scn.M)


def _forward(X, H, sigma2, gen, what):
    X = np.asarray(X)
    H = np.asarray(H)
    if H.shape[-1] != X.shape[-2]:
        raise ConfigurationError(
            f"{what}: channel {H.shape} does not conform with signal {X.shape}"
        )
    if sigma2 < 0.0:
        raise ConfigurationError(f"{what}: noise variance must be nonnegative")
    clean = H @ X
    if sigma2 == 0.0:
        return clean
    return clean + complex_gaussian(gen, clean.shape, sigma2)


def forward_sense(X, H_s, sigma_s2, rng):
    """Sensing echo Y_s = H_s X + Z_s (sigma_s2 = 0 gives the clean echo)."""
    return _forward(X, H_s, sigma_s2, rng.generator(), "sensing channel")


def forward_comm(X, H_c, sigma_c2, rng):
    """Communication output Y_c = H_c X + Z_c."""
    return _forward(X, H_c, sigma_c2, rng.generator(), "communication channel")


def forward_batch(X, H, sigma2, gen):
    """Batched forward channel used inside Monte Carlo blocks."""
    return _forward(X, H, sigma2, gen, "channel")


def sample_comm_channels(scn, count, rng):
    """
    Communication channel samples for ergodic averages.

    Returns:
        list: `[scn.H_c]` for a fixed channel, otherwise `count` i.i.d.
              Rayleigh N_c x M draws with CN(0, 1) entries.
    """
    if scn.H_c is not None:
        return [scn.H_c]
    draws = complex_gaussian(rng.generator(), (count, scn.N_c, scn.M))
    return list(draws)
