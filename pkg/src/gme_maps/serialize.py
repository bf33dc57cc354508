"""JSON formats for states (mpop-v1), map expressions (mapexpr-v1) and CSV reports.

Complex scalars are encoded as [re, im] pairs; matrices as row-major flat
lists of pairs.  Documents carry an explicit "format" field so files stay
self-describing.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .maps import (BreuerHall, Choi, Compose, Conjugate, DiagAll, Identity,
                   Lift, MapExpr, Reduction, Scale, SchurWith, Sum,
                   TraceIdentity, TraceOuter, Transpose)
from .operators import MpOperator, PartySubset, SiteDims
from .states import PureState

STATE_FORMAT = "mpop-v1"
MAP_FORMAT = "mapexpr-v1"


def _pairs(arr: np.ndarray) -> list[list[float]]:
    flat = np.asarray(arr, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _unpairs(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs])


def state_to_json(obj: MpOperator | PureState) -> dict:
    if isinstance(obj, PureState):
        return {"format": STATE_FORMAT, "dims": list(obj.dims.dims),
                "vector": _pairs(obj.vec)}
    return {"format": STATE_FORMAT, "dims": list(obj.dims.dims),
            "matrix": _pairs(obj.mat)}


def state_from_json(doc: dict) -> MpOperator | PureState:
    if doc.get("format") != STATE_FORMAT:
        raise ValueError(f"expected format {STATE_FORMAT!r}, got {doc.get('format')!r}")
    dims = SiteDims(tuple(int(d) for d in doc["dims"]))
    D = dims.total
    if "vector" in doc:
        vec = _unpairs(doc["vector"])
        if vec.shape != (D,):
            raise ValueError("vector length does not match dims")
        return PureState(dims, vec)
    if "matrix" in doc:
        mat = _unpairs(doc["matrix"])
        if mat.size != D * D:
            raise ValueError("matrix size does not match dims")
        return MpOperator(dims, mat.reshape(D, D))
    raise ValueError("state document needs a 'vector' or 'matrix' field")


def load_state(path: str) -> MpOperator | PureState:
    with open(path, encoding="utf-8") as fh:
        return state_from_json(json.load(fh))


def save_state(path: str, obj: MpOperator | PureState) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_json(obj), fh)
        fh.write("\n")


def _mat_doc(arr: np.ndarray) -> dict:
    return {"dim": int(arr.shape[0]), "entries": _pairs(arr)}


def _mat_undoc(doc: dict) -> np.ndarray:
    d = int(doc["dim"])
    return _unpairs(doc["entries"]).reshape(d, d)


def _node_to_json(m: MapExpr) -> dict:
    if isinstance(m, Identity):
        return {"kind": "identity", "d": m.dim}
    if isinstance(m, Transpose):
        return {"kind": "transpose", "d": m.dim}
    if isinstance(m, Reduction):
        return {"kind": "reduction", "d": m.dim}
    if isinstance(m, BreuerHall):
        return {"kind": "breuer-hall", "d": m.dim, "v": _mat_doc(m.v)}
    if isinstance(m, Choi):
        return {"kind": "choi", "d": m.dim, "adjoint": m.adjoint}
    if isinstance(m, Conjugate):
        return {"kind": "conjugate", "u": _mat_doc(m.u)}
    if isinstance(m, DiagAll):
        return {"kind": "diag", "d": m.dim}
    if isinstance(m, TraceIdentity):
        return {"kind": "trace-identity", "c": str(m.c), "d": m.dim}
    if isinstance(m, TraceOuter):
        return {"kind": "trace-outer", "weight": _mat_doc(m.weight),
                "output": _mat_doc(m.output)}
    if isinstance(m, SchurWith):
        return {"kind": "schur", "mask": _mat_doc(m.mask)}
    if isinstance(m, Lift):
        return {"kind": "lift", "child": _node_to_json(m.child),
                "parties": list(m.parties.members), "dims": list(m.dims.dims)}
    if isinstance(m, Sum):
        return {"kind": "sum", "children": [_node_to_json(c) for c in m.children]}
    if isinstance(m, Scale):
        return {"kind": "scale", "r": float(m.r), "child": _node_to_json(m.child)}
    if isinstance(m, Compose):
        return {"kind": "compose", "outer": _node_to_json(m.outer),
                "inner": _node_to_json(m.inner)}
    raise TypeError(f"cannot serialize map node {type(m).__name__}")


def _node_from_json(doc: dict) -> MapExpr:
    kind = doc["kind"]
    if kind == "identity":
        return Identity(int(doc["d"]))
    if kind == "transpose":
        return Transpose(int(doc["d"]))
    if kind == "reduction":
        return Reduction(int(doc["d"]))
    if kind == "breuer-hall":
        return BreuerHall(int(doc["d"]), _mat_undoc(doc["v"]))
    if kind == "choi":
        return Choi(int(doc["d"]), bool(doc.get("adjoint", False)))
    if kind == "conjugate":
        return Conjugate(_mat_undoc(doc["u"]))
    if kind == "diag":
        return DiagAll(int(doc["d"]))
    if kind == "trace-identity":
        return TraceIdentity(Fraction(doc["c"]), int(doc["d"]))
    if kind == "trace-outer":
        return TraceOuter(_mat_undoc(doc["weight"]), _mat_undoc(doc["output"]))
    if kind == "schur":
        return SchurWith(_mat_undoc(doc["mask"]))
    if kind == "lift":
        return Lift(_node_from_json(doc["child"]),
                    PartySubset(tuple(int(p) for p in doc["parties"])),
                    SiteDims(tuple(int(d) for d in doc["dims"])))
    if kind == "sum":
        return Sum(tuple(_node_from_json(c) for c in doc["children"]))
    if kind == "scale":
        return Scale(float(doc["r"]), _node_from_json(doc["child"]))
    if kind == "compose":
        return Compose(_node_from_json(doc["outer"]), _node_from_json(doc["inner"]))
    raise ValueError(f"unknown map node kind {kind!r}")


def mapexpr_to_json(m: MapExpr) -> dict:
    return {"format": MAP_FORMAT, "root": _node_to_json(m)}


def mapexpr_from_json(doc: dict) -> MapExpr:
    if doc.get("format") != MAP_FORMAT:
        raise ValueError(f"expected format {MAP_FORMAT!r}, got {doc.get('format')!r}")
    return _node_from_json(doc["root"])


def jsonable(obj: Any) -> Any:
    """Recursively convert reports/dataclasses to JSON-serialisable values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _pairs(obj)
        return [float(x) for x in obj.reshape(-1)]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def dumps_report(obj: Any) -> str:
    """Deterministic JSON text for a report object."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def scan_csv(rows) -> str:
    """CSV text with header param,min_eig,detected."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["param", "min_eig", "detected"])
    for r in rows:
        writer.writerow([repr(float(r.param)), repr(float(r.min_eig)),
                         "true" if r.detected else "false"])
    return buf.getvalue()
