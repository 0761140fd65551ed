"""Transformer embedding extraction for the softzca pipeline."""

from .extract import (
    FIELD_CODE,
    FIELD_COMMENT,
    POOLING_MEAN_LAST_HIDDEN,
    POOLING_MODEL_DEFAULT,
    AdapterError,
    ExtractionSpec,
    extract,
    read_records,
)

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "ExtractionSpec",
    "FIELD_CODE",
    "FIELD_COMMENT",
    "POOLING_MEAN_LAST_HIDDEN",
    "POOLING_MODEL_DEFAULT",
    "extract",
    "read_records",
]
