"""Soft-ZCA whitening, isotropy scoring, and retrieval evaluation for embeddings."""

from .errors import (
    ConfigError,
    DecompositionError,
    DegenerateCloudError,
    FormatError,
    InputError,
    NumericalError,
    RankZeroError,
    SoftZcaError,
    ZeroVectorError,
)
from .isoscore import IsoScoreValue, isoscore
from .retrieval import (
    DIRECTION_CODE_TO_COMMENT,
    DIRECTION_COMMENT_TO_CODE,
    EvalReport,
    PairedCorpus,
    cosine_similarity_matrix,
    evaluate,
    generate_paired_corpus,
    reciprocal_ranks,
)
from .whitening import (
    EigenDecomposition,
    EmbeddingSet,
    FitStatistics,
    Method,
    WhiteningTransform,
    apply_transform,
    build_transform,
    eigendecompose,
    fit_statistics,
    generate_anisotropic_gaussian,
    random_orthogonal,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DecompositionError",
    "DegenerateCloudError",
    "DIRECTION_CODE_TO_COMMENT",
    "DIRECTION_COMMENT_TO_CODE",
    "EigenDecomposition",
    "EmbeddingSet",
    "EvalReport",
    "FitStatistics",
    "FormatError",
    "InputError",
    "IsoScoreValue",
    "Method",
    "NumericalError",
    "PairedCorpus",
    "RankZeroError",
    "SoftZcaError",
    "WhiteningTransform",
    "ZeroVectorError",
    "apply_transform",
    "build_transform",
    "cosine_similarity_matrix",
    "eigendecompose",
    "evaluate",
    "fit_statistics",
    "generate_anisotropic_gaussian",
    "generate_paired_corpus",
    "isoscore",
    "random_orthogonal",
    "reciprocal_ranks",
]
