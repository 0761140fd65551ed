"""Sequence embedding extraction from transformer checkpoints.

Reads a JSONL corpus of {"id", "text", "field"} records (field is "code" or
"comment"), runs each text through a checkpoint without padding, truncated to
a token budget, and pools one vector per record. Emits one float32 NPY matrix
per field (code.npy, comments.npy) plus a manifest.json that the softzca
pipeline consumes as a pair manifest.

Sequences are encoded one at a time, unpadded, so batching strategy can never
leak padding into the pooled vectors; results are deterministic in inference
mode.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch


POOLING_MEAN_LAST_HIDDEN = "mean_last_hidden"
POOLING_MODEL_DEFAULT = "model_default"
POOLINGS = (POOLING_MEAN_LAST_HIDDEN, POOLING_MODEL_DEFAULT)

FIELD_CODE = "code"
FIELD_COMMENT = "comment"
FIELDS = (FIELD_CODE, FIELD_COMMENT)
FIELD_FILES = {FIELD_CODE: "code.npy", FIELD_COMMENT: "comments.npy"}

MANIFEST_FILE = "manifest.json"


class AdapterError(Exception):
    """Extraction failure: bad input records, model problems, or empty output."""


@dataclass
class ExtractionSpec:
    """What to extract: checkpoint, corpus, pooling, and token budget."""

    model: str
    input_path: Path
    output_dir: Path
    pooling: str = POOLING_MEAN_LAST_HIDDEN
    max_tokens: int = 256

    def __post_init__(self) -> None:
        if self.pooling not in POOLINGS:
            raise AdapterError(f"unknown pooling {self.pooling!r}; expected one of {POOLINGS}")
        if self.max_tokens < 1:
            raise AdapterError(f"max_tokens must be >= 1, got {self.max_tokens}")
        self.input_path = Path(self.input_path)
        self.output_dir = Path(self.output_dir)


@dataclass
class Record:
    id: str
    text: str
    field: str


def read_records(path: Path) -> list[Record]:
    """Parse the JSONL corpus, validating every record."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise AdapterError(f"{path}: cannot read input corpus: {exc}") from exc
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"{path}:{lineno}: malformed JSON record: {exc}") from exc
        if not isinstance(payload, dict) or not {"id", "text", "field"} <= set(payload):
            raise AdapterError(f'{path}:{lineno}: record needs "id", "text", and "field"')
        rid, text, fld = str(payload["id"]), payload["text"], payload["field"]
        if fld not in FIELDS:
            raise AdapterError(f"{path}:{lineno}: record {rid!r} has unknown field {fld!r}")
        if not isinstance(text, str) or not text.strip():
            raise AdapterError(f"{path}:{lineno}: record {rid!r} has empty text")
        records.append(Record(id=rid, text=text, field=fld))
    if not records:
        raise AdapterError(f"{path}: corpus contains no records; nothing to extract")
    return records


def _load_checkpoint(model_id: str):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise AdapterError(f"cannot load checkpoint {model_id!r}: {exc}") from exc
    model.eval()
    return tokenizer, model


def _pool(output, pooling: str, record_id: str) -> torch.Tensor:
    if pooling == POOLING_MEAN_LAST_HIDDEN:
        hidden = getattr(output, "last_hidden_state", None)
        if hidden is None:
            raise AdapterError(
                f"record {record_id!r}: model returns no last_hidden_state; try model_default pooling"
            )
        return hidden[0].mean(dim=0)
    # model_default: whatever single vector the checkpoint itself produces
    if isinstance(output, torch.Tensor) and output.dim() == 2:
        return output[0]
    pooled = getattr(output, "pooler_output", None)
    if pooled is not None:
        return pooled[0]
    raise AdapterError(
        f"record {record_id!r}: model provides no default pooled output; use mean_last_hidden"
    )


def _embed_text(text: str, tokenizer, model, spec: ExtractionSpec, record_id: str) -> np.ndarray:
    try:
        encoded = tokenizer(text, truncation=True, max_length=spec.max_tokens, return_tensors="pt")
    except Exception as exc:
        raise AdapterError(f"record {record_id!r}: tokenization failed: {exc}") from exc
    try:
        with torch.no_grad():
            output = model(**encoded)
    except Exception as exc:
        raise AdapterError(f"record {record_id!r}: model forward pass failed: {exc}") from exc
    vector = _pool(output, spec.pooling, record_id)
    return vector.to(torch.float32).cpu().numpy()


def _atomic_write_npy(path: Path, matrix: np.ndarray) -> None:
    # the .npy suffix keeps numpy from appending one to the temp name
    tmp = path.with_name(f"{path.stem}.tmp-{os.getpid()}.npy")
    np.save(tmp, matrix)
    os.replace(tmp, path)


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def extract(spec: ExtractionSpec) -> dict:
    """Run the extraction and return the manifest that was written.

    Output rows follow the input record order within each field. When both
    fields are present their id sequences must match row for row, because the
    downstream evaluation pairs row i of one matrix with row i of the other.
    """
    records = read_records(spec.input_path)
    tokenizer, model = _load_checkpoint(spec.model)

    by_field: dict[str, list[Record]] = {}
    for record in records:
        by_field.setdefault(record.field, []).append(record)

    spec.output_dir.mkdir(parents=True, exist_ok=True)
    field_meta: dict[str, dict] = {}
    for fld, group in by_field.items():
        rows = [_embed_text(r.text, tokenizer, model, spec, r.id) for r in group]
        matrix = np.stack(rows).astype(np.float32)
        _atomic_write_npy(spec.output_dir / FIELD_FILES[fld], matrix)
        field_meta[fld] = {"count": len(group), "ids": [r.id for r in group]}

    if len(field_meta) == 2:
        code_ids = field_meta[FIELD_CODE]["ids"]
        comment_ids = field_meta[FIELD_COMMENT]["ids"]
        if code_ids != comment_ids:
            raise AdapterError(
                "code and comment records are not row-aligned: the id sequences differ, "
                "so row-index pairing downstream would be wrong"
            )
        shared_ids = code_ids
    else:
        shared_ids = next(iter(field_meta.values()))["ids"]

    manifest = {
        "count": len(shared_ids),
        "ids": shared_ids,
        "model": spec.model,
        "pooling": spec.pooling,
        "max_tokens": spec.max_tokens,
        "truncation_counts_special_tokens": True,
        "fields": field_meta,
    }
    _atomic_write_text(spec.output_dir / MANIFEST_FILE, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
