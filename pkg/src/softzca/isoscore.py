"""IsoScore: how uniformly a point cloud spreads across the directions of its space.

The score lives in [0, 1]: 1 for identity-proportional covariance, 0 for a
cloud concentrated along a single direction. It is invariant under rotation
and positive rescaling of the data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCloudError, InputError
from .whitening import EmbeddingSet, eigendecompose, fit_statistics


@dataclass(frozen=True)
class IsoScoreValue:
    """An isotropy score together with the cloud's shape."""

    score: float
    dim: int
    sample_count: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise InputError(f"score must lie in [0, 1], got {self.score}")


def isoscore(embeddings: EmbeddingSet) -> IsoScoreValue:
    """Compute the isotropy score of a point cloud.

    The cloud is centered and reoriented into its principal-component basis;
    the per-dimension variance profile is normalized to norm sqrt(d) and its
    distance to the all-ones profile is mapped to [0, 1], where 1 means the
    variance is spread perfectly evenly over all d directions.

    Raises DegenerateCloudError when all points coincide.
    """
    if embeddings.row_count < 2:
        raise InputError(f"isotropy needs at least 2 points, got {embeddings.row_count}")
    stats = fit_statistics(embeddings)
    if float(np.max(np.abs(stats.covariance))) == 0.0:
        raise DegenerateCloudError("all points are identical; isotropy is undefined")

    basis = eigendecompose(stats).eigenvectors
    reoriented = (embeddings.data - stats.mean) @ basis
    variances = reoriented.var(axis=0)

    d = embeddings.dim
    norm = float(np.linalg.norm(variances))
    if norm == 0.0:
        raise DegenerateCloudError("variance profile is identically zero")
    profile = np.sqrt(d) * variances / norm
    defect = float(np.linalg.norm(profile - 1.0)) / np.sqrt(2.0 * (d - np.sqrt(d)))
    k = (d - defect**2 * (d - np.sqrt(d))) ** 2 / d**2
    score = (d * k - 1.0) / (d - 1.0)
    return IsoScoreValue(score=float(np.clip(score, 0.0, 1.0)), dim=d, sample_count=embeddings.row_count)
