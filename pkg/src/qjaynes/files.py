"""File formats: channel, state and constraint documents, and report output.

Documents are JSON. Complex numbers are ``[re, im]`` pairs and matrices are
row-major lists of rows. Output is deterministic: keys keep their insertion
order and floats are written with 17 significant digits, so writing a parsed
canonical file reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .process import CONTINUOUS, DISCRETE, InvalidProcessError, ProcessSpec

SCHEMA_VERSION = "1.0"


class FileFormatError(ValueError):
    """Malformed document; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------- emitter

def _float_text(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x}")
    text = format(x, ".17g")
    if text == "-0":
        text = "0"
    return text


def _is_scalar(x) -> bool:
    return x is None or isinstance(x, (bool, int, float, str, np.generic))


def _plain(obj):
    """Convert numpy values and complex numbers to JSON-ready Python objects."""
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _emit(obj, indent: int, level: int) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float_text(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        # short rows of scalars stay on one line
        if all(_is_scalar(v) for v in obj) or all(isinstance(v, list) and all(_is_scalar(u) for u in v) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (pad + json.dumps(k) + ": " + _emit(v, indent, level + 1) for k, v in obj.items())
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text with a trailing newline."""
    return _emit(_plain(obj), indent, 0) + "\n"


def finite_or_text(x: float):
    """Floats for reports: non-finite values become the strings ``"inf"``/``"nan"``."""
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


# ---------------------------------------------------------------- parsing

def _reject_constant(name):
    raise FileFormatError("", f"non-finite number {name} is not allowed")


def loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FileFormatError("", f"invalid JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None


def read_document(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(str(path), f"cannot read file ({exc.strerror})") from None
    doc = loads(text)
    if not isinstance(doc, dict):
        raise FileFormatError("", "top level must be an object")
    return doc


def _number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FileFormatError(path, f"expected a number, got {type(x).__name__}")
    x = float(x)
    if not math.isfinite(x):
        raise FileFormatError(path, "non-finite number")
    return x


def parse_matrix(data, path: str, dim: int | None = None) -> np.ndarray:
    """Complex matrix from rows of ``[re, im]`` pairs."""
    if not isinstance(data, list) or not data:
        raise FileFormatError(path, "expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(data):
        if not isinstance(row, list):
            raise FileFormatError(f"{path}[{i}]", "expected a row (list of [re, im] pairs)")
        vals = []
        for j, entry in enumerate(row):
            where = f"{path}[{i}][{j}]"
            if not isinstance(entry, list) or len(entry) != 2:
                raise FileFormatError(where, "expected a [re, im] pair")
            vals.append(complex(_number(entry[0], where + "[0]"), _number(entry[1], where + "[1]")))
        rows.append(vals)
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise FileFormatError(f"{path}[{i}]", f"row has {len(row)} entries, expected {n} (square matrix)")
    if dim is not None and n != dim:
        raise FileFormatError(path, f"matrix is {n}x{n} but dim is {dim}")
    return np.array(rows, dtype=complex)


def matrix_to_data(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _field(doc: dict, key: str, path: str = ""):
    if key not in doc:
        raise FileFormatError(f"{path}{key}", "missing required field")
    return doc[key]


def _check_schema(doc: dict):
    version = _field(doc, "schema_version")
    if not isinstance(version, str):
        raise FileFormatError("schema_version", "expected a string")
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise FileFormatError("schema_version", f"unsupported version {version!r} (expected {SCHEMA_VERSION})")


def parse_channel(doc: dict, check: bool = True) -> ProcessSpec:
    """ProcessSpec from a channel document.

    With ``check=False`` physically invalid processes (for example Kraus
    operators that are not trace preserving) are returned unvalidated.
    """
    _check_schema(doc)
    kind = _field(doc, "kind")
    if kind not in (DISCRETE, CONTINUOUS):
        raise FileFormatError("kind", f"expected 'discrete' or 'continuous', got {kind!r}")
    dim = _field(doc, "dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise FileFormatError("dim", "expected a positive integer")
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise FileFormatError("label", "expected a string")
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise FileFormatError("meta", "expected an object")
    try:
        if kind == DISCRETE:
            ops = _field(doc, "kraus")
            if not isinstance(ops, list) or not ops:
                raise FileFormatError("kraus", "expected a non-empty list of matrices")
            kraus = [parse_matrix(k, f"kraus[{i}]", dim) for i, k in enumerate(ops)]
            return ProcessSpec.discrete(kraus, label=label, meta=meta, check=check)
        h = parse_matrix(_field(doc, "hamiltonian"), "hamiltonian", dim)
        ops = doc.get("lindblad_ops", [])
        if not isinstance(ops, list):
            raise FileFormatError("lindblad_ops", "expected a list of matrices")
        ls = [parse_matrix(op, f"lindblad_ops[{i}]", dim) for i, op in enumerate(ops)]
        return ProcessSpec.continuous(h, ls, label=label, meta=meta, check=check)
    except InvalidProcessError as exc:
        raise FileFormatError("kraus" if kind == DISCRETE else "hamiltonian", str(exc)) from None


def channel_document(spec: ProcessSpec) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "kind": spec.kind, "dim": spec.dim}
    if spec.label is not None:
        doc["label"] = spec.label
    if spec.kind == DISCRETE:
        doc["kraus"] = [matrix_to_data(k) for k in spec.kraus]
    else:
        doc["hamiltonian"] = matrix_to_data(spec.hamiltonian)
        doc["lindblad_ops"] = [matrix_to_data(op) for op in spec.lindblad_ops]
    if spec.meta:
        doc["meta"] = dict(spec.meta)
    return doc


def serialize_channel(spec: ProcessSpec) -> str:
    return dumps(channel_document(spec))


def load_channel(path, check: bool = True) -> ProcessSpec:
    return parse_channel(read_document(path), check=check)


def parse_state(doc: dict, dim: int) -> np.ndarray:
    """Density matrix from ``{"schema_version", "rho"}``; validity is checked by the caller."""
    _check_schema(doc)
    return parse_matrix(_field(doc, "rho"), "rho", dim)


def state_document(rho) -> dict:
    return {"schema_version": SCHEMA_VERSION, "dim": int(np.asarray(rho).shape[0]), "rho": matrix_to_data(rho)}


def parse_constraints(doc: dict, dim: int) -> list[dict]:
    """Constraint entries ``{"index"|"label"|"operator", "target"}``.

    Returns dicts with keys ``key`` (int, str or None), ``operator`` (array
    or None) and ``target`` (float, or None in known-state mode). A
    top-level ``"state"`` matrix is returned as an entry with key ``"state"``.
    """
    _check_schema(doc)
    out = []
    if "state" in doc:
        out.append({"key": "state", "operator": parse_matrix(doc["state"], "state", dim), "target": None})
    items = doc.get("constraints", [])
    if not isinstance(items, list):
        raise FileFormatError("constraints", "expected a list")
    for i, item in enumerate(items):
        path = f"constraints[{i}]"
        if not isinstance(item, dict):
            raise FileFormatError(path, "expected an object")
        given = [k for k in ("index", "label", "operator") if k in item]
        if len(given) != 1:
            raise FileFormatError(path, "give exactly one of 'index', 'label' or 'operator'")
        target = _number(_field(item, "target", path + "."), path + ".target")
        entry = {"key": None, "operator": None, "target": target}
        if "index" in item:
            idx = item["index"]
            if isinstance(idx, bool) or not isinstance(idx, int):
                raise FileFormatError(path + ".index", "expected an integer")
            entry["key"] = idx
        elif "label" in item:
            if not isinstance(item["label"], str):
                raise FileFormatError(path + ".label", "expected a string")
            entry["key"] = item["label"]
        else:
            entry["operator"] = parse_matrix(item["operator"], path + ".operator", dim)
        out.append(entry)
    return out
