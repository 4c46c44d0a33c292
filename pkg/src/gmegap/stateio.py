"""JSON interchange for states and operators.

A file holds one object::

    {"kind": "density" | "pure" | "operator",
     "shape": {"local_dims": [2, 2]},
     "data": ...}

``data`` is a row-major nested list of ``[re, im]`` pairs: a list of rows for
matrices, a flat list for pure states.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .tensor import DensityState, Operator, PureState, SystemShape

KINDS = {"density": DensityState, "pure": PureState, "operator": Operator}


class StateFileError(ValueError):
    pass


def _pairs(arr: np.ndarray) -> list:
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def to_dict(obj: Union[DensityState, PureState, Operator]) -> dict:
    for kind, cls in KINDS.items():
        if isinstance(obj, cls):
            data = obj.amplitudes if kind == "pure" else obj.matrix
            return {"kind": kind, "shape": {"local_dims": list(obj.shape.local_dims)}, "data": _pairs(data)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(doc: dict):
    try:
        kind = doc["kind"]
        dims = doc["shape"]["local_dims"]
        raw = np.asarray(doc["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise StateFileError(f"malformed state document: {exc}") from exc
    if kind not in KINDS:
        raise StateFileError(f"unknown kind {kind!r}; expected one of {sorted(KINDS)}")
    if raw.shape[-1:] != (2,):
        raise StateFileError("entries must be [re, im] pairs")
    arr = raw[..., 0] + 1j * raw[..., 1]
    try:
        return KINDS[kind](arr, SystemShape(tuple(dims)))
    except ValueError as exc:
        raise StateFileError(str(exc)) from exc


def save(obj, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(to_dict(obj)))


def load(path: Union[str, Path]):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path}: not valid JSON ({exc})") from exc
    return from_dict(doc)


def as_density(obj) -> DensityState:
    if isinstance(obj, PureState):
        return obj.density()
    if isinstance(obj, DensityState):
        return obj
    raise StateFileError(f"expected a state, got {type(obj).__name__}")
