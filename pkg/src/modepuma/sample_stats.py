"""
Snapshot simulation and second-order statistics.

Implements the narrowband model y(t) = A s(t) + n(t) with circular complex
Gaussian sources and noise, the sample covariance, its eigendecomposition
into signal subspace / noise power, and the diagonal signal weights
g_i = (lambda_i - sigma^2)^2 / lambda_i used by the weighted subspace fit.
"""

from dataclasses import dataclass, field

import numpy as np

from .array_model import AngleSet, steering_matrix
from .errors import NumericalError, ValidationError

# Sentinel for the n_snapshots field of an exactly computed covariance.
EXACT = "exact"


@dataclass(frozen=True)
class Scenario:
    """Complete description of one simulated experiment."""

    m: int
    r: int
    angles: AngleSet
    source_cov: np.ndarray  # r x r Hermitian PSD
    noise_power: float
    n_snapshots: int
    seed: int

    def __post_init__(self):
        if not isinstance(self.angles, AngleSet):
            object.__setattr__(self, "angles", AngleSet(self.angles))
        if self.r != self.angles.r:
            raise ValidationError("r does not match the number of angles")
        if self.r >= self.m:
            raise ValidationError(f"need r < m, got r={self.r}, m={self.m}")
        P = np.asarray(self.source_cov, dtype=complex).reshape(self.r, self.r)
        if np.linalg.norm(P - P.conj().T) > 1e-12 * max(1.0, np.linalg.norm(P)):
            raise ValidationError("source covariance must be Hermitian")
        w = np.linalg.eigvalsh(0.5 * (P + P.conj().T))
        if w.size and w[0] < -1e-10 * max(w[-1], 1.0):
            raise ValidationError("source covariance must be positive semidefinite")
        object.__setattr__(self, "source_cov", P)
        if self.noise_power < 0:
            raise ValidationError("noise power must be >= 0")
        if self.n_snapshots < 1:
            raise ValidationError("need at least one snapshot")
        if not (0 <= int(self.seed) < 2**64):
            raise ValidationError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class SnapshotSet:
    """m x T matrix of array snapshots, column t = y(t)."""

    snapshots: np.ndarray
    provenance: Scenario = field(compare=False)

    @property
    def n_snapshots(self):
        return self.snapshots.shape[1]


@dataclass(frozen=True)
class SampleCovariance:
    """Hermitian m x m covariance with the snapshot count that produced it."""

    matrix: np.ndarray
    n_snapshots: object  # int, or EXACT for a model covariance

    @property
    def m(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SubspaceDecomposition:
    """Principal eigenpairs of a covariance plus the noise-power estimate."""

    u_signal: np.ndarray  # m x r orthonormal
    lambdas: np.ndarray  # r descending
    sigma2: float
    all_eigenvalues: np.ndarray  # m descending, diagnostic

    @property
    def m(self):
        return self.u_signal.shape[0]

    @property
    def r(self):
        return self.u_signal.shape[1]


@dataclass(frozen=True)
class SignalWeight:
    """Diagonal weights g_i = (lambda_i - sigma^2)^2 / lambda_i."""

    g: np.ndarray


def true_covariance(scenario):
    """Exact model covariance A P A* + sigma^2 I (no sampling)."""
    A = steering_matrix(scenario.angles, scenario.m).entries
    R = A @ scenario.source_cov @ A.conj().T
    R = R + scenario.noise_power * np.eye(scenario.m)
    return SampleCovariance(matrix=0.5 * (R + R.conj().T), n_snapshots=EXACT)


def _hermitian_sqrt(P):
    w, V = np.linalg.eigh(0.5 * (P + P.conj().T))
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def _snapshot_rng(seed, t):
    # Counter-based substream per snapshot: results do not depend on how
    # snapshots are batched or parallelized.
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) + t))


def simulate_snapshots(scenario):
    """Draw T snapshots y(t) = A s(t) + n(t), deterministic given the seed.

    Sources and noise are circular complex Gaussian: real and imaginary
    parts are independent zero-mean Gaussians with half the target
    variance; sources are colored by the Hermitian square root of P.
    """
    m, r, T = scenario.m, scenario.r, scenario.n_snapshots
    A = steering_matrix(scenario.angles, scenario.m).entries
    L = _hermitian_sqrt(scenario.source_cov)
    sigma = np.sqrt(scenario.noise_power)
    Y = np.empty((m, T), dtype=complex)
    for t in range(T):
        z = _snapshot_rng(scenario.seed, t).standard_normal(2 * (r + m))
        w = (z[0::2] + 1j * z[1::2]) / np.sqrt(2.0)
        Y[:, t] = A @ (L @ w[:r]) + sigma * w[r:]
    return SnapshotSet(snapshots=Y, provenance=scenario)


def sample_covariance(snapshots):
    """(1/T) sum_t y(t) y*(t), symmetrized to be exactly Hermitian."""
    Y = snapshots.snapshots if isinstance(snapshots, SnapshotSet) else np.asarray(snapshots)
    if Y.ndim != 2 or Y.shape[1] < 1:
        raise ValidationError("need an m x T snapshot matrix with T >= 1")
    T = Y.shape[1]
    R = (Y @ Y.conj().T) / T
    return SampleCovariance(matrix=0.5 * (R + R.conj().T), n_snapshots=T)


def subspace_decomposition(cov, r):
    """Split a covariance into r principal eigenpairs and the noise floor.

    sigma2 is the mean of the m - r smallest eigenvalues.  Each
    eigenvector's phase is fixed so its largest-magnitude entry is real
    positive, making the output deterministic.
    """
    R = cov.matrix if isinstance(cov, SampleCovariance) else np.asarray(cov)
    m = R.shape[0]
    if not (0 < r < m):
        raise ValidationError(f"need 0 < r < m, got r={r}, m={m}")
    try:
        w, V = np.linalg.eigh(0.5 * (R + R.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    w, V = w[::-1], V[:, ::-1]  # descending
    U = V[:, :r].copy()
    for i in range(r):
        k = int(np.argmax(np.abs(U[:, i])))
        ph = U[k, i] / abs(U[k, i])
        U[:, i] = U[:, i] / ph
    sigma2 = float(np.mean(w[r:]))
    return SubspaceDecomposition(
        u_signal=U,
        lambdas=w[:r].copy(),
        sigma2=sigma2,
        all_eigenvalues=w.copy(),
    )


def signal_weight(decomp):
    """Weights g_i = (lambda_i - sigma^2)^2 / lambda_i from a decomposition."""
    lam = np.asarray(decomp.lambdas, dtype=float)
    if np.any(lam <= 0):
        raise ValidationError("signal eigenvalues must be positive")
    g = (lam - decomp.sigma2) ** 2 / lam
    return SignalWeight(g=g)
