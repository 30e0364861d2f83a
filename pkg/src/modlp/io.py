"""JSON matrix files.

A file holds one object::

    {"kind": "state", "dim": 2, "data": [[[0.5, 0.0], [0.0, 0.0]],
                                         [[0.0, 0.0], [0.5, 0.0]]]}

Complex entries are ``[re, im]`` pairs in row-major nesting.  ``kind`` is one
of ``matrix``, ``state``, ``functional`` or ``channel``; a channel carries
``dim`` (input), ``dim_out`` and a list of ``dim_out x dim`` Kraus matrices in
``data``.  Floats are written with the shortest repr that round-trips, so a
written file reparses to bit-identical values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import KrausChannel
from .errors import ModLpError
from .matrix import PositiveFunctional

KINDS = ("matrix", "state", "functional", "channel")
STATE_LOAD_TOL = 1e-9


class FileFormatError(ModLpError):
    pass


@dataclass(frozen=True, eq=False)
class MatrixFile:
    kind: str
    dim: int
    data: object  # ndarray, or a list of ndarrays for channels
    dim_out: int | None = None


def encode_matrix(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(obj, rows: int, cols: int) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"malformed matrix data: {exc}") from None
    if arr.shape != (rows, cols, 2):
        raise FileFormatError(f"expected shape ({rows}, {cols}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def to_dict(mf: MatrixFile) -> dict:
    out = {"kind": mf.kind, "dim": mf.dim}
    if mf.kind == "channel":
        out["dim_out"] = mf.dim_out
        out["data"] = [encode_matrix(k) for k in mf.data]
    else:
        out["data"] = encode_matrix(mf.data)
    return out


def dumps(mf: MatrixFile) -> str:
    return json.dumps(to_dict(mf), allow_nan=False) + "\n"


def write_matrix_file(path, mf: MatrixFile) -> None:
    Path(path).write_text(dumps(mf), encoding="utf-8")


def _positive_int(obj, name: str) -> int:
    if not isinstance(obj, int) or isinstance(obj, bool) or obj < 1:
        raise FileFormatError(f"{name} must be a positive integer")
    return obj


def from_dict(obj: dict, validate: bool = True) -> MatrixFile:
    if not isinstance(obj, dict):
        raise FileFormatError("top level must be an object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise FileFormatError(f"kind must be one of {KINDS}, got {kind!r}")
    dim = _positive_int(obj.get("dim"), "dim")
    if "data" not in obj:
        raise FileFormatError("missing data")
    if kind == "channel":
        dim_out = _positive_int(obj.get("dim_out"), "dim_out")
        if not isinstance(obj["data"], list) or not obj["data"]:
            raise FileFormatError("channel data must be a nonempty list of matrices")
        ops = [decode_matrix(k, dim_out, dim) for k in obj["data"]]
        if validate:
            try:
                KrausChannel(ops)
            except ModLpError as exc:
                raise FileFormatError(f"invalid channel: {exc}") from None
        return MatrixFile(kind, dim, ops, dim_out)
    data = decode_matrix(obj["data"], dim, dim)
    if validate and kind in ("state", "functional"):
        _validate_positive(data, kind)
    return MatrixFile(kind, dim, data)


def _validate_positive(data: np.ndarray, kind: str) -> None:
    try:
        f = PositiveFunctional.from_density(data)
    except ModLpError as exc:
        raise FileFormatError(f"{kind} is not positive semidefinite: {exc}") from None
    if kind == "state":
        tr = np.trace(f.density).real
        if abs(tr - 1.0) > STATE_LOAD_TOL:
            raise FileFormatError(f"state has trace {tr!r}")


def loads(text: str, validate: bool = True) -> MatrixFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"invalid JSON: {exc}") from None
    return from_dict(obj, validate)


def read_matrix_file(path, validate: bool = True) -> MatrixFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from None
    return loads(text, validate)
