"""Covariance estimation, symmetric eigendecomposition, and whitening transforms.

Data is held row-major (N samples x d features) and a fitted transform maps a
row x to W (x - mu). Supported whitening constructions:

    zca       W = U diag(lam)^(-1/2) U^T          (inverse square root)
    soft_zca  W = U diag(lam + eps)^(-1/2) U^T    (regularized eigenvalues)
    pca       W = diag(lam + eps)^(-1/2) U^T      (rotated variant)
    cholesky  W = L^(-1) with Cov + eps*I = L L^T

All statistics and decompositions are computed in float64 regardless of the
input storage precision; eigenvalues below a relative floor are clamped so
zca stays usable on rank-deficient covariances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DecompositionError, InputError, RankZeroError

# Eigenvalues below this fraction of the largest one are clamped up to the
# floor before any inversion, bounding the amplification of noise directions.
EIGENVALUE_FLOOR_RATIO = 1e-10

# Tolerances used to validate container invariants on construction.
_SYMMETRY_RTOL = 1e-12
_PSD_RTOL = 1e-8
_TRANSFORM_SYMMETRY_RTOL = 1e-10


class Method(str, Enum):
    """Whitening matrix construction."""

    ZCA = "zca"
    SOFT_ZCA = "soft_zca"
    PCA = "pca"
    CHOLESKY = "cholesky"


@dataclass(frozen=True)
class EmbeddingSet:
    """An N x d matrix of row-vector embeddings, stored as float64.

    Requires N >= 1 rows, d >= 2 features, and finite entries.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise InputError(f"embedding matrix must be 2-D, got shape {data.shape}")
        n, d = data.shape
        if n < 1:
            raise InputError("embedding matrix must have at least one row")
        if d < 2:
            raise InputError(f"embedding dimension must be >= 2, got {d}")
        if not np.all(np.isfinite(data)):
            raise InputError("embedding matrix contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def row_count(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class FitStatistics:
    """Mean vector and population covariance estimated from an EmbeddingSet."""

    mean: np.ndarray
    covariance: np.ndarray
    sample_count: int

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mean.ndim != 1:
            raise InputError(f"mean must be a vector, got shape {mean.shape}")
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise InputError(f"covariance shape {cov.shape} does not match dimension {d}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InputError("statistics contain non-finite entries")
        scale = float(np.max(np.abs(cov)))
        if float(np.max(np.abs(cov - cov.T))) > _SYMMETRY_RTOL * max(scale, 1.0):
            raise InputError("covariance is not symmetric within tolerance")
        eigvals = np.linalg.eigvalsh(cov)
        if eigvals[0] < -_PSD_RTOL * max(eigvals[-1], 0.0):
            raise InputError("covariance is not positive semi-definite within tolerance")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class EigenDecomposition:
    """Orthogonal eigenvectors (columns) and descending, clamped eigenvalues."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.eigenvectors, dtype=np.float64)
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        d = lam.shape[0]
        if u.shape != (d, d):
            raise InputError(f"eigenvector matrix shape {u.shape} does not match {d} eigenvalues")
        if np.any(lam < 0.0) or np.any(np.diff(lam) > 0.0):
            raise InputError("eigenvalues must be non-negative and sorted descending")
        if float(np.max(np.abs(u.T @ u - np.eye(d)))) > 1e-8:
            raise InputError("eigenvector matrix is not orthogonal within tolerance")
        object.__setattr__(self, "eigenvectors", u)
        object.__setattr__(self, "eigenvalues", lam)

    def reconstruct(self) -> np.ndarray:
        """Covariance implied by the decomposition (with the clamped spectrum)."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


@dataclass(frozen=True)
class WhiteningTransform:
    """A fitted whitening map: rows transform as W (x - mean)."""

    method: Method
    epsilon: float
    mean: np.ndarray
    matrix: np.ndarray

    def __post_init__(self) -> None:
        method = Method(self.method)
        mean = np.asarray(self.mean, dtype=np.float64)
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.epsilon < 0.0:
            raise ConfigError(f"epsilon must be non-negative, got {self.epsilon}")
        if mean.ndim != 1:
            raise InputError(f"mean must be a vector, got shape {mean.shape}")
        d = mean.shape[0]
        if matrix.shape != (d, d):
            raise InputError(f"matrix shape {matrix.shape} does not match dimension {d}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(matrix))):
            raise InputError("transform contains non-finite entries")
        if method in (Method.ZCA, Method.SOFT_ZCA):
            scale = max(float(np.max(np.abs(matrix))), 1.0)
            if float(np.max(np.abs(matrix - matrix.T))) > _TRANSFORM_SYMMETRY_RTOL * scale:
                raise InputError(f"{method.value} whitening matrix must be symmetric")
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def fit_statistics(embeddings: EmbeddingSet) -> FitStatistics:
    """Estimate the column mean and population covariance of an embedding set.

    Uses the 1/N normalization, so whitening fitted on a set and applied to
    the same set yields exactly unit covariance. Requires N >= 2 rows.
    """
    n = embeddings.row_count
    if n < 2:
        raise InputError(f"covariance estimation needs at least 2 samples, got {n}")
    mean = embeddings.data.mean(axis=0)
    centered = embeddings.data - mean
    cov = centered.T @ centered / n
    cov = 0.5 * (cov + cov.T)
    return FitStatistics(mean=mean, covariance=cov, sample_count=n)


def eigendecompose(stats: FitStatistics) -> EigenDecomposition:
    """Symmetric eigendecomposition of the covariance, descending eigenvalues.

    Eigenvalues below EIGENVALUE_FLOOR_RATIO times the largest one are clamped
    up to that floor (a warning is emitted), so downstream inverse square
    roots stay bounded on rank-deficient covariances. Eigenvector signs are
    fixed by making each column's largest-magnitude entry positive.

    Raises RankZeroError when the covariance has no positive eigenvalue.
    """
    lam, u = np.linalg.eigh(stats.covariance)
    lam = lam[::-1]
    u = u[:, ::-1]
    lam_max = float(lam[0])
    if lam_max <= 0.0:
        raise RankZeroError("covariance has no positive eigenvalue; whitening is undefined")
    floor = EIGENVALUE_FLOOR_RATIO * lam_max
    n_clamped = int(np.sum(lam < floor))
    if n_clamped:
        warnings.warn(
            f"covariance is rank-deficient: {n_clamped} of {lam.size} eigenvalues "
            f"clamped to {floor:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
        lam = np.maximum(lam, floor)
    cols = np.arange(u.shape[1])
    signs = np.sign(u[np.argmax(np.abs(u), axis=0), cols])
    signs[signs == 0.0] = 1.0
    return EigenDecomposition(eigenvectors=u * signs, eigenvalues=lam)


def build_transform(
    stats: FitStatistics,
    method: Method | str = Method.SOFT_ZCA,
    epsilon: float = 0.0,
    eig: EigenDecomposition | None = None,
) -> WhiteningTransform:
    """Construct a whitening transform from fitted statistics.

    Args:
        stats: mean and covariance to whiten against.
        method: one of zca, soft_zca, pca, cholesky. zca is soft_zca at eps 0.
        epsilon: non-negative eigenvalue regularizer. Larger values weaken
            the whitening; at eps 0 the transform maps the fitting data to
            exactly unit covariance (up to eigenvalue clamping).
        eig: optional precomputed decomposition of stats.covariance, reused
            across epsilon values when sweeping.
    """
    method = Method(method)
    if epsilon < 0.0:
        raise ConfigError(f"epsilon must be non-negative, got {epsilon}")
    if float(np.max(np.abs(stats.covariance))) == 0.0:
        raise RankZeroError("covariance is the zero matrix; whitening is undefined")

    if method is Method.CHOLESKY:
        target = stats.covariance + epsilon * np.eye(stats.dim)
        try:
            lower = np.linalg.cholesky(target)
        except np.linalg.LinAlgError as exc:
            raise DecompositionError(
                f"Cholesky factorization failed: covariance + {epsilon}*I is not "
                "positive definite (increase epsilon or use soft_zca)"
            ) from exc
        matrix = np.linalg.inv(lower)
    else:
        dec = eig if eig is not None else eigendecompose(stats)
        inv_sqrt = 1.0 / np.sqrt(dec.eigenvalues + epsilon)
        if method is Method.PCA:
            matrix = inv_sqrt[:, None] * dec.eigenvectors.T
        else:
            matrix = (dec.eigenvectors * inv_sqrt) @ dec.eigenvectors.T
            matrix = 0.5 * (matrix + matrix.T)

    return WhiteningTransform(method=method, epsilon=float(epsilon), mean=stats.mean.copy(), matrix=matrix)


def apply_transform(transform: WhiteningTransform, embeddings: EmbeddingSet) -> EmbeddingSet:
    """Apply a fitted transform: each row x becomes W (x - mean)."""
    if embeddings.dim != transform.dim:
        raise InputError(
            f"dimension mismatch: transform is {transform.dim}-dimensional, "
            f"data is {embeddings.dim}-dimensional"
        )
    return EmbeddingSet((embeddings.data - transform.mean) @ transform.matrix.T)


def random_orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Draw a uniformly distributed orthogonal matrix (QR with sign fix)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def generate_anisotropic_gaussian(
    seed: int,
    n: int,
    spectrum,
    rotate: bool = False,
) -> EmbeddingSet:
    """Sample a zero-mean Gaussian cloud with a prescribed covariance spectrum.

    The covariance is Q diag(spectrum) Q^T with Q the identity, or a seeded
    random orthogonal matrix when rotate is set. Deterministic for a fixed
    seed.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.ndim != 1 or spectrum.size < 2:
        raise InputError("spectrum must be a vector with at least 2 entries")
    if not np.all(np.isfinite(spectrum)) or np.any(spectrum <= 0.0):
        raise InputError("spectrum entries must be positive finite reals")
    if n < 2:
        raise InputError(f"need at least 2 samples, got {n}")
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((n, spectrum.size)) * np.sqrt(spectrum)
    if rotate:
        data = data @ random_orthogonal(rng, spectrum.size).T
    return EmbeddingSet(data)
