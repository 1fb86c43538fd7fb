"""Flat binary export with JSON sidecars.

Dense arrays go to ``<stem>.bin`` (little-endian float64, row-major) plus
``<stem>.json`` describing the shape.  Sparse matrices are written in CSR form
as three binaries ``<stem>.data.bin`` (float64), ``<stem>.indices.bin`` and
``<stem>.indptr.bin`` (int64) with a sidecar of format ``"csr"``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

__all__ = ["write_array", "read_array", "write_matrix", "read_matrix"]


def _sidecar(path: Path, meta: dict) -> None:
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def write_array(stem, arr) -> Path:
    stem = Path(stem)
    arr = np.ascontiguousarray(arr, dtype="<f8")
    stem.with_suffix(".bin").write_bytes(arr.tobytes(order="C"))
    _sidecar(stem.with_suffix(".json"),
             {"format": "dense", "dtype": "<f8", "order": "C", "shape": list(arr.shape)})
    return stem.with_suffix(".bin")


def read_array(stem) -> np.ndarray:
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    raw = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype=meta["dtype"])
    return raw.reshape(meta["shape"]).astype(float)


def write_matrix(stem, matrix) -> None:
    """Write a dense or sparse matrix."""
    stem = Path(stem)
    if not sp.issparse(matrix):
        write_array(stem, matrix)
        return
    m = sp.csr_matrix(matrix)
    Path(f"{stem}.data.bin").write_bytes(np.asarray(m.data, dtype="<f8").tobytes())
    Path(f"{stem}.indices.bin").write_bytes(np.asarray(m.indices, dtype="<i8").tobytes())
    Path(f"{stem}.indptr.bin").write_bytes(np.asarray(m.indptr, dtype="<i8").tobytes())
    _sidecar(stem.with_suffix(".json"),
             {"format": "csr", "dtype": "<f8", "index_dtype": "<i8",
              "shape": list(m.shape), "nnz": int(m.nnz)})


def read_matrix(stem):
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    if meta["format"] == "dense":
        return read_array(stem)
    data = np.frombuffer(Path(f"{stem}.data.bin").read_bytes(), dtype="<f8")
    indices = np.frombuffer(Path(f"{stem}.indices.bin").read_bytes(), dtype="<i8")
    indptr = np.frombuffer(Path(f"{stem}.indptr.bin").read_bytes(), dtype="<i8")
    return sp.csr_matrix((data, indices, indptr), shape=tuple(meta["shape"]))
