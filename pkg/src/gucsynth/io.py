"""JSON file formats for matrices, sequences and color partitions.

Floats are written with Python's shortest round-trip ``repr``, so reading a file
back gives bit-identical arrays. Mode indices are 0-based.
"""

import json

import numpy as np

from .errors import FormatError
from .sequence import CompiledSequence, CouplerUse, LocalStep

VERSION = 1
ORDERING = "q1p1"


def dumps(obj):
    try:
        return json.dumps(obj, allow_nan=False, separators=(",", ":")) + "\n"
    except ValueError as exc:
        raise FormatError(f"cannot serialize non-finite value: {exc}") from exc


def loads(text, what="file"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _floats(rows):
    return [[float(x) for x in row] for row in np.asarray(rows, dtype=float)]


def matrix_to_dict(S):
    S = np.asarray(S, dtype=float)
    return {"version": VERSION, "n_modes": S.shape[0] // 2, "ordering": ORDERING, "data": _floats(S)}


def matrix_from_dict(obj, what="matrix"):
    if not isinstance(obj, dict):
        raise FormatError(f"{what}: expected a JSON object")
    if obj.get("version") != VERSION:
        raise FormatError(f"{what}: unsupported version {obj.get('version')!r}")
    if obj.get("ordering", ORDERING) != ORDERING:
        raise FormatError(f"{what}: only the {ORDERING!r} quadrature ordering is supported")
    n = obj.get("n_modes")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FormatError(f"{what}: n_modes must be a positive integer")
    data = obj.get("data")
    if (
        not isinstance(data, list)
        or len(data) != 2 * n
        or any(not isinstance(r, list) or len(r) != 2 * n for r in data)
    ):
        raise FormatError(f"{what}: data must be a {2 * n}x{2 * n} list of rows")
    try:
        S = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: non-numeric entry ({exc})") from exc
    if not np.all(np.isfinite(S)):
        raise FormatError(f"{what}: non-finite entry")
    return S


def dump_matrix(S):
    return dumps(matrix_to_dict(S))


def load_matrix(text, what="matrix"):
    return matrix_from_dict(loads(text, what), what)


def sequence_to_dict(seq, report=None):
    steps = []
    for step in seq.steps:
        if isinstance(step, CouplerUse):
            steps.append({"type": "coupler"})
        else:
            steps.append({"type": "local", "blocks": [_floats(b) for b in step.blocks]})
    out = {
        "version": VERSION,
        "n_modes": seq.n_modes,
        "target_modes": [int(m) for m in seq.target_modes],
        "steps": steps,
    }
    if report is not None:
        out["report"] = dict(report.to_dict() if hasattr(report, "to_dict") else report)
        if seq.seed is not None:
            out["report"]["seed"] = int(seq.seed)
    return out


def sequence_from_dict(obj, what="sequence"):
    """Parse a sequence file into ``(CompiledSequence, report dict or None)``."""
    if not isinstance(obj, dict) or obj.get("version") != VERSION:
        raise FormatError(f"{what}: expected a version {VERSION} sequence object")
    n = obj.get("n_modes")
    if not isinstance(n, int) or n < 1:
        raise FormatError(f"{what}: n_modes must be a positive integer")
    raw = obj.get("steps")
    if not isinstance(raw, list):
        raise FormatError(f"{what}: steps must be a list")
    steps = []
    for k, item in enumerate(raw):
        kind = item.get("type") if isinstance(item, dict) else None
        if kind == "coupler":
            steps.append(CouplerUse())
        elif kind == "local":
            try:
                blocks = np.array(item["blocks"], dtype=float)
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{what}: step {k} has malformed blocks") from exc
            if blocks.shape != (n, 2, 2) or not np.all(np.isfinite(blocks)):
                raise FormatError(f"{what}: step {k} must hold {n} finite 2x2 blocks")
            steps.append(LocalStep(blocks))
        else:
            raise FormatError(f"{what}: step {k} has unknown type {kind!r}")
    modes = obj.get("target_modes", [])
    if not isinstance(modes, list) or any(not isinstance(m, int) for m in modes):
        raise FormatError(f"{what}: target_modes must be a list of integers")
    return CompiledSequence(steps, n_modes=n, target_modes=modes), obj.get("report")


def partition_to_dict(partition, copies_used=1, permutation=None):
    if permutation is None:
        permutation = partition.successor
    return {
        "color_sets": [[int(m) for m in s] for s in partition.sets],
        "permutation": [None if c is None else int(c) for c in permutation],
        "copies_used": int(copies_used),
    }
