"""JSON file formats for gates and protocols.

UnitaryFile: {"d_a", "d_b", "re", "im"} with re/im the row-major real and
imaginary parts of the full matrix, composite index (a, b) -> a * d_b + b.

ProtocolFile: {"d_a", "d_b", "root"} where an internal node is
{"party": "A"|"B", "operators": [{"re", "im"}, ...], "children": {"0": node,
...}} and a leaf is {"corrections": {"a": matrix-or-null, "b":
matrix-or-null}}.

Serialization is canonical (sorted keys, two-space indent, trailing newline,
shortest-round-trip floats), so write -> read -> write is byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .gates import BipartiteUnitary
from .locc import LoccProtocol, Measurement, ProtocolNode

__all__ = [
    "InputFileError",
    "canonical_dumps",
    "unitary_to_json",
    "unitary_from_json",
    "protocol_to_json",
    "protocol_from_json",
    "write_unitary",
    "read_unitary",
    "write_protocol",
    "read_protocol",
]


class InputFileError(ValueError):
    """Malformed or invalid input file; maps to CLI exit code 1."""


def canonical_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    # Adding 0.0 collapses negative zeros so write -> read -> write is
    # byte-identical.
    return {"re": (m.real + 0.0).tolist(), "im": (m.imag + 0.0).tolist()}


def _matrix_from_json(obj, shape: tuple[int, int], what: str) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj or "im" not in obj:
        raise InputFileError(f"{what}: expected an object with 're' and 'im'")
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputFileError(f"{what}: non-numeric matrix entries ({exc})") from None
    if re.shape != shape or im.shape != shape:
        raise InputFileError(
            f"{what}: expected shape {shape}, got re {re.shape}, im {im.shape}"
        )
    m = re + 1j * im
    if not np.all(np.isfinite(re)) or not np.all(np.isfinite(im)):
        raise InputFileError(f"{what}: entries must be finite")
    return m


def _dims_from_json(obj, what: str) -> tuple[int, int]:
    for key in ("d_a", "d_b"):
        if key not in obj or not isinstance(obj[key], int) or obj[key] < 1:
            raise InputFileError(f"{what}: '{key}' must be a positive integer")
    return obj["d_a"], obj["d_b"]


def unitary_to_json(gate: BipartiteUnitary) -> dict:
    out = _matrix_to_json(gate.matrix)
    out.update({"d_a": gate.d_a, "d_b": gate.d_b})
    return out


def unitary_from_json(obj) -> BipartiteUnitary:
    if not isinstance(obj, dict):
        raise InputFileError("unitary file: expected a JSON object")
    d_a, d_b = _dims_from_json(obj, "unitary file")
    d = d_a * d_b
    matrix = _matrix_from_json(obj, (d, d), "unitary file")
    try:
        return BipartiteUnitary(d_a, d_b, matrix)
    except ValueError as exc:
        raise InputFileError(f"unitary file: {exc}") from None


def _node_to_json(node: ProtocolNode) -> dict:
    if node.is_leaf:
        return {
            "corrections": {
                "a": None if node.a_correction is None else _matrix_to_json(node.a_correction),
                "b": None if node.b_correction is None else _matrix_to_json(node.b_correction),
            }
        }
    m = node.measurement
    return {
        "party": m.party,
        "operators": [_matrix_to_json(op) for op in m.operators],
        "children": {
            str(outcome): _node_to_json(child)
            for outcome, child in sorted(node.children.items())
        },
    }


def _node_from_json(obj, d_a: int, d_b: int, path: str) -> ProtocolNode:
    what = f"protocol node {path or 'root'}"
    if not isinstance(obj, dict):
        raise InputFileError(f"{what}: expected a JSON object")
    if "party" not in obj:
        corr = obj.get("corrections", {})
        if not isinstance(corr, dict):
            raise InputFileError(f"{what}: 'corrections' must be an object")
        a = corr.get("a")
        b = corr.get("b")
        return ProtocolNode(
            None,
            {},
            None if a is None else _matrix_from_json(a, (d_a, d_a), f"{what} correction a"),
            None if b is None else _matrix_from_json(b, (d_b, d_b), f"{what} correction b"),
        )
    party = obj["party"]
    if party not in ("A", "B"):
        raise InputFileError(f"{what}: party must be 'A' or 'B'")
    d = d_a if party == "A" else d_b
    ops_json = obj.get("operators")
    if not isinstance(ops_json, list) or not ops_json:
        raise InputFileError(f"{what}: 'operators' must be a nonempty list")
    operators = [
        _matrix_from_json(op, (d, d), f"{what} operator {k}")
        for k, op in enumerate(ops_json)
    ]
    children_json = obj.get("children")
    if not isinstance(children_json, dict):
        raise InputFileError(f"{what}: 'children' must be an object")
    if set(children_json) != {str(k) for k in range(len(operators))}:
        raise InputFileError(f"{what}: children must cover outcomes 0..{len(operators) - 1}")
    children = {
        int(key): _node_from_json(child, d_a, d_b, f"{path}/{key}".lstrip("/"))
        for key, child in children_json.items()
    }
    return ProtocolNode(Measurement(party, operators), children)


def protocol_to_json(protocol: LoccProtocol) -> dict:
    return {
        "d_a": protocol.d_a,
        "d_b": protocol.d_b,
        "root": _node_to_json(protocol.root),
    }


def protocol_from_json(obj) -> LoccProtocol:
    if not isinstance(obj, dict) or "root" not in obj:
        raise InputFileError("protocol file: expected an object with 'root'")
    d_a, d_b = _dims_from_json(obj, "protocol file")
    protocol = LoccProtocol(d_a, d_b, _node_from_json(obj["root"], d_a, d_b, ""))
    try:
        protocol.validate()
    except ValueError as exc:
        raise InputFileError(f"protocol file: {exc}") from None
    return protocol


def _read_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputFileError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFileError(f"{path}: invalid JSON ({exc})") from None


def write_unitary(path, gate: BipartiteUnitary) -> None:
    Path(path).write_text(canonical_dumps(unitary_to_json(gate)))


def read_unitary(path) -> BipartiteUnitary:
    return unitary_from_json(_read_json(path))


def write_protocol(path, protocol: LoccProtocol) -> None:
    Path(path).write_text(canonical_dumps(protocol_to_json(protocol)))


def read_protocol(path) -> LoccProtocol:
    return protocol_from_json(_read_json(path))
