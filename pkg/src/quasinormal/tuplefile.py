"""JSON file formats for tuples, subspaces and grids.

Complex numbers are written as ``[re, im]`` pairs. A tuple file looks like::

    {"name": "jordan2", "d": 1, "dim": 2,
     "matrices": [[[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]],
     "expected": {"spherically_qn": false}}

``name`` and ``expected`` are optional. :func:`dumps_tuple` produces the
canonical layout; ``dumps_tuple(loads_tuple(s)) == s`` for canonical ``s``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import OperatorTuple, SubspaceBasis


class TupleFileError(ValueError):
    pass


def _reject_constant(name):
    raise TupleFileError(f"non-finite number {name} is not allowed")


def _loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise TupleFileError(f"invalid JSON: {exc}") from None


def _complex(pair, where: str) -> complex:
    if (not isinstance(pair, list) or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                       for x in pair)):
        raise TupleFileError(f"{where}: expected a [re, im] pair, got {pair!r}")
    re, im = float(pair[0]), float(pair[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise TupleFileError(f"{where}: non-finite entry")
    return complex(re, im)


def _vector(v, n: int, where: str) -> np.ndarray:
    if not isinstance(v, list) or len(v) != n:
        raise TupleFileError(f"{where}: expected {n} entries")
    return np.array([_complex(z, f"{where}[{i}]") for i, z in enumerate(v)])


def _pairs(a: np.ndarray):
    return [[float(z.real), float(z.imag)] for z in a]


@dataclass
class TupleFile:
    tuple: OperatorTuple
    name: str | None = None
    expected: dict | None = field(default=None)


def loads_tuple(text: str) -> TupleFile:
    doc = _loads(text)
    if not isinstance(doc, dict):
        raise TupleFileError("top level must be an object")
    for key in ("d", "dim", "matrices"):
        if key not in doc:
            raise TupleFileError(f"missing field {key!r}")
    d, n = doc["d"], doc["dim"]
    if not (isinstance(d, int) and isinstance(n, int)) or d < 1 or n < 1:
        raise TupleFileError("d and dim must be positive integers")
    mats = doc["matrices"]
    if not isinstance(mats, list) or len(mats) != d:
        raise TupleFileError(f"expected {d} matrices")
    arrs = []
    for k, m in enumerate(mats):
        if not isinstance(m, list) or len(m) != n:
            raise TupleFileError(f"matrix {k}: expected {n} rows")
        arrs.append(np.array([_vector(row, n, f"matrix {k} row {i}")
                              for i, row in enumerate(m)]))
    expected = doc.get("expected")
    if expected is not None and not isinstance(expected, dict):
        raise TupleFileError("expected must be an object")
    name = doc.get("name")
    return TupleFile(OperatorTuple(arrs), None if name is None else str(name), expected)


def dumps_tuple(T: OperatorTuple, name: str | None = None,
                expected: dict | None = None) -> str:
    lines = ["{"]
    if name is not None:
        lines.append(f'  "name": {json.dumps(name)},')
    lines.append(f'  "d": {T.d},')
    lines.append(f'  "dim": {T.dim},')
    lines.append('  "matrices": [')
    for k, a in enumerate(T):
        lines.append("    [")
        for i, row in enumerate(a):
            sep = "," if i < T.dim - 1 else ""
            lines.append(f"      {json.dumps(_pairs(row))}{sep}")
        lines.append("    ]" + ("," if k < T.d - 1 else ""))
    lines.append("  ]" + ("," if expected is not None else ""))
    if expected is not None:
        lines.append(f'  "expected": {json.dumps(expected, sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def read_tuple(path) -> TupleFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TupleFileError(f"cannot read {path}: {exc}") from None
    return loads_tuple(text)


def write_tuple(path, T: OperatorTuple, name=None, expected=None):
    Path(path).write_text(dumps_tuple(T, name, expected), encoding="utf-8")


def loads_subspace(text: str, dim: int | None = None) -> SubspaceBasis:
    """``{"dim": n, "columns": [[[re, im], ...], ...]}``; the span is orthonormalized."""
    doc = _loads(text)
    if not isinstance(doc, dict) or "columns" not in doc:
        raise TupleFileError("subspace file needs a 'columns' field")
    cols = doc["columns"]
    n = doc.get("dim", dim)
    if not isinstance(cols, list) or not cols:
        raise TupleFileError("columns must be a non-empty list")
    if n is None:
        n = len(cols[0]) if isinstance(cols[0], list) else 0
    if dim is not None and n != dim:
        raise TupleFileError(f"subspace dimension {n} does not match tuple dimension {dim}")
    vecs = np.column_stack([_vector(c, n, f"column {j}") for j, c in enumerate(cols)])
    return SubspaceBasis.from_span(vecs)


def dumps_subspace(H: SubspaceBasis) -> str:
    cols = [_pairs(H.cols[:, j]) for j in range(H.m)]
    return json.dumps({"dim": H.n, "columns": cols}) + "\n"


def loads_grid(text: str, d: int) -> np.ndarray:
    """A JSON list of points (or ``{"points": [...]}``), each ``d`` pairs."""
    doc = _loads(text)
    if isinstance(doc, dict):
        doc = doc.get("points")
    if not isinstance(doc, list):
        raise TupleFileError("grid must be a list of points")
    return np.array([_vector(p, d, f"point {i}") for i, p in enumerate(doc)]).reshape(-1, d)
