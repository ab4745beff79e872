"""JSON files for states and witnesses, CSV helpers.

Complex scalars are ``[re, im]`` pairs and matrices are row-major nested
lists.  Floats are written with ``repr`` precision, so a write/read round
trip reproduces every matrix bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .states import DensityMatrix


class FormatError(ValueError):
    """A state or witness file is malformed."""


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix is not a nested numeric array: {exc}") from None
    if arr.ndim == 3 and arr.shape[2] == 2:
        m = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == 2:
        m = arr.astype(np.complex128)
    else:
        raise FormatError(f"matrix has shape {arr.shape}; expected (n, n, 2)")
    if m.shape[0] != m.shape[1]:
        raise FormatError(f"matrix is not square: {m.shape}")
    return m


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(_clean(payload), indent=1) + "\n")


def read_json(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: top level must be an object")
    return data


def state_to_json(rho: DensityMatrix) -> dict:
    return {"dims": list(rho.dims), "matrix": matrix_to_json(rho.matrix)}


def write_state(path, rho: DensityMatrix) -> None:
    write_json(path, state_to_json(rho))


def read_state(path) -> DensityMatrix:
    data = read_json(path)
    if "dims" not in data or "matrix" not in data:
        raise FormatError(f"{path}: state file needs 'dims' and 'matrix'")
    m = matrix_from_json(data["matrix"])
    try:
        return DensityMatrix(m, tuple(int(d) for d in data["dims"]))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def witness_to_json(result) -> dict:
    payload = {"dims": list(result.dims), "matrix": matrix_to_json(result.witness)}
    payload.update(result.summary())
    return payload


def write_witness(path, result) -> None:
    write_json(path, witness_to_json(result))


def read_witness(path) -> tuple[np.ndarray, dict]:
    """Return the witness matrix and the remaining metadata."""
    data = read_json(path)
    if "dims" not in data or "matrix" not in data:
        raise FormatError(f"{path}: witness file needs 'dims' and 'matrix'")
    w = matrix_from_json(data.pop("matrix"))
    dims = data["dims"]
    if not isinstance(dims, list) or int(np.prod(dims)) != w.shape[0]:
        raise FormatError(f"{path}: dims {dims} do not match matrix size {w.shape[0]}")
    return w, data


class CsvSink:
    """Row-by-row CSV writer that flushes after every row."""

    def __init__(self, path, columns):
        self.path = Path(path)
        self.columns = list(columns)
        self._fh = self.path.open("w", newline="")
        self._w = csv.DictWriter(self._fh, fieldnames=self.columns)
        self._w.writeheader()
        self._fh.flush()

    def write(self, row: dict) -> None:
        self._w.writerow({k: row.get(k) for k in self.columns})
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
