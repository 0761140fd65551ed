"""File interchange: NPY matrices, CSV fallback, transform containers, manifests.

Matrices travel as NPY version 1.0 restricted to little-endian IEEE-754
float32/float64, C-contiguous, 2-D; files produced by numpy.save for such
arrays load unchanged. A UTF-8 CSV fallback (one row per line, comma-separated
decimal floats) is accepted for small inputs.

A fitted transform persists as one binary file: a JSON header line with the
method, epsilon, dimension, and format version, followed by the raw
little-endian float64 bytes of the mean vector and the d x d matrix. Write
then read then write reproduces the file byte for byte.
"""

from __future__ import annotations

import ast
import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .whitening import Method, WhiteningTransform

NPY_MAGIC = b"\x93NUMPY"
_SUPPORTED_DESCRS = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}

TRANSFORM_FORMAT = "softzca-transform"
TRANSFORM_VERSION = 1

FORMAT_NPY = "npy"
FORMAT_CSV = "csv"


def save_npy(path, matrix: np.ndarray) -> None:
    """Write a 2-D float matrix as NPY 1.0 (little-endian, C-order)."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise FormatError(f"only 2-D matrices are supported, got shape {matrix.shape}")
    dtype = np.dtype("<f4") if matrix.dtype == np.float32 else np.dtype("<f8")
    matrix = np.ascontiguousarray(matrix, dtype=dtype)

    header = f"{{'descr': '{dtype.str}', 'fortran_order': False, 'shape': {matrix.shape!r}, }}"
    # Pad so magic + version + length field + header is a multiple of 64.
    pad = 64 - (len(NPY_MAGIC) + 2 + 2 + len(header) + 1) % 64
    header = header + " " * pad + "\n"
    with open(path, "wb") as fh:
        fh.write(NPY_MAGIC)
        fh.write(b"\x01\x00")
        fh.write(struct.pack("<H", len(header)))
        fh.write(header.encode("latin1"))
        fh.write(matrix.tobytes(order="C"))


def load_npy(path) -> np.ndarray:
    """Read an NPY file, enforcing the supported subset."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read file: {exc}") from exc
    if len(raw) < 10 or raw[:6] != NPY_MAGIC:
        raise FormatError(f"{path}: not an NPY file")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise FormatError(f"{path}: NPY version {major}.{minor} is outside the supported subset (1.0)")
    header_len = struct.unpack("<H", raw[8:10])[0]
    body_start = 10 + header_len
    if len(raw) < body_start:
        raise FormatError(f"{path}: truncated NPY header")
    try:
        header = ast.literal_eval(raw[10:body_start].decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"{path}: malformed NPY header: {exc}") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"{path}: malformed NPY header dictionary")
    descr = header["descr"]
    if descr not in _SUPPORTED_DESCRS:
        raise FormatError(
            f"{path}: dtype {descr!r} is outside the supported subset (little-endian float32/float64)"
        )
    if header["fortran_order"] is not False:
        raise FormatError(f"{path}: Fortran-ordered arrays are outside the supported subset")
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or len(shape) != 2
        or not all(isinstance(s, int) and s >= 0 for s in shape)
    ):
        raise FormatError(f"{path}: only 2-D matrices are supported, got shape {shape!r}")
    dtype = _SUPPORTED_DESCRS[descr]
    expected = shape[0] * shape[1] * dtype.itemsize
    payload = raw[body_start:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes but shape {shape} requires {expected}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def save_csv_matrix(path, matrix: np.ndarray) -> None:
    """Write a matrix as CSV, one row per line, full-precision decimal floats."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise FormatError(f"only 2-D matrices are supported, got shape {matrix.shape}")
    lines = [",".join(repr(float(v)) for v in row) for row in matrix]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_csv_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except OSError as exc:
        raise FormatError(f"{path}: cannot read file: {exc}") from exc
    except ValueError as exc:
        raise FormatError(f"{path}: cannot parse CSV matrix: {exc}") from exc


def detect_matrix_format(path) -> str:
    """Sniff whether a file is NPY or CSV (by magic bytes, not extension)."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(len(NPY_MAGIC))
    except OSError as exc:
        raise FormatError(f"{path}: cannot read file: {exc}") from exc
    return FORMAT_NPY if head == NPY_MAGIC else FORMAT_CSV


def load_matrix(path) -> np.ndarray:
    """Load a matrix from NPY or CSV, sniffing the format."""
    if detect_matrix_format(path) == FORMAT_NPY:
        return load_npy(path)
    return load_csv_matrix(path)


def save_matrix(path, matrix: np.ndarray, fmt: str = FORMAT_NPY) -> None:
    if fmt == FORMAT_NPY:
        save_npy(path, matrix)
    elif fmt == FORMAT_CSV:
        save_csv_matrix(path, matrix)
    else:
        raise FormatError(f"unknown matrix format {fmt!r}")


def save_transform(path, transform: WhiteningTransform) -> None:
    """Persist a fitted transform (JSON header line + raw float64 payload)."""
    header = {
        "format": TRANSFORM_FORMAT,
        "version": TRANSFORM_VERSION,
        "method": transform.method.value,
        "epsilon": float(transform.epsilon),
        "dim": transform.dim,
    }
    mean = np.ascontiguousarray(transform.mean, dtype="<f8")
    matrix = np.ascontiguousarray(transform.matrix, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(mean.tobytes(order="C"))
        fh.write(matrix.tobytes(order="C"))


def load_transform(path) -> WhiteningTransform:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read file: {exc}") from exc
    newline = raw.find(b"\n")
    if newline < 0:
        raise FormatError(f"{path}: missing transform header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed transform header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != TRANSFORM_FORMAT:
        raise FormatError(f"{path}: not a {TRANSFORM_FORMAT} file")
    if header.get("version") != TRANSFORM_VERSION:
        raise FormatError(f"{path}: unsupported transform version {header.get('version')!r}")
    try:
        method = Method(header["method"])
        epsilon = float(header["epsilon"])
        dim = int(header["dim"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: invalid transform header fields: {exc}") from exc
    if dim < 2:
        raise FormatError(f"{path}: transform dimension must be >= 2, got {dim}")
    payload = raw[newline + 1 :]
    expected = 8 * (dim + dim * dim)
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    mean = np.frombuffer(payload[: 8 * dim], dtype="<f8").copy()
    matrix = np.frombuffer(payload[8 * dim :], dtype="<f8").reshape(dim, dim).copy()
    return WhiteningTransform(method=method, epsilon=epsilon, mean=mean, matrix=matrix)


def load_pair_manifest(path) -> list:
    """Read a pair manifest: a JSON object with "count" and row-aligned "ids"."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"{path}: cannot read file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed manifest JSON: {exc}") from exc
    if not isinstance(payload, dict) or "count" not in payload or "ids" not in payload:
        raise FormatError(f'{path}: manifest must be an object with "count" and "ids"')
    count, ids = payload["count"], payload["ids"]
    if not isinstance(count, int) or not isinstance(ids, list):
        raise FormatError(f'{path}: "count" must be an integer and "ids" a list')
    if len(ids) != count:
        raise FormatError(f"{path}: manifest count {count} does not match {len(ids)} ids")
    return ids
