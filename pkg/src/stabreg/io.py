"""JSON instance and partition files.

Every file is an object with a ``kind`` key.  Parts are written as
``{"labels": [...], "weights": [[num, den], ...]}``; ternary sequences are
strings over ``{0,1,2}``.  Readers reject weights that do not sum to 1.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, Tuple

import numpy as np

from .core import GradedPartition, PartiteFunction, StructuralError, WeightedPart, rational_str, to_rational
from .generators import AverageSystem, Hypergraph3, TernaryInstance

KINDS = ("average", "ternary", "function", "hypergraph", "partition")


def _frac_pair(q: Fraction):
    return [q.numerator, q.denominator]


def _label_out(lab):
    if isinstance(lab, tuple):
        return "".join(str(c) for c in lab)
    if isinstance(lab, Fraction):
        return rational_str(lab)
    if isinstance(lab, (np.integer,)):
        return int(lab)
    return lab


def part_to_json(part: WeightedPart) -> Dict[str, Any]:
    return {"labels": [_label_out(l) for l in part.labels],
            "weights": [_frac_pair(w) for w in part.weights]}


def part_from_json(obj, seq: bool = False) -> WeightedPart:
    if not isinstance(obj, dict) or set(obj) != {"labels", "weights"}:
        raise StructuralError("a part needs exactly the keys 'labels' and 'weights'")
    labels = obj["labels"]
    if seq:
        if not all(isinstance(s, str) and set(s) <= set("012") for s in labels):
            raise StructuralError("ternary labels are strings over {0,1,2}")
        labels = [tuple(int(c) for c in s) for s in labels]
    weights = [to_rational(w) for w in obj["weights"]]
    return WeightedPart(labels, weights)


def _key(e) -> str:
    return ",".join(str(i) for i in e)


def _unkey(s: str) -> Tuple[int, ...]:
    try:
        return tuple(int(t) for t in s.split(","))
    except ValueError:
        raise StructuralError(f"bad index key {s!r}") from None


def to_json(obj) -> Dict[str, Any]:
    if isinstance(obj, AverageSystem):
        fams = {}
        for e in obj.edges:
            fams[_key(e)] = {_key(t): sorted((_label_out(z) for z in sub), key=str)
                             for t, sub in sorted(obj.families[e].items())}
        return {"kind": "average", "k": obj.k, "d": obj.d,
                "parts": [part_to_json(p) for p in obj.parts],
                "omega": part_to_json(obj.omega), "families": fams}
    if isinstance(obj, TernaryInstance):
        out = {"kind": "ternary", "n": obj.n, "p": obj.p,
               "parts": [part_to_json(p) for p in obj.parts]}
        if obj.orders is not None:
            out["orders"] = [[_label_out(s) for s in o] for o in obj.orders]
        return out
    if isinstance(obj, PartiteFunction):
        vals = np.vectorize(lambda v: rational_str(Fraction(int(v), obj.denom)), otypes=[object])(obj.numer)
        return {"kind": "function", "parts": [part_to_json(p) for p in obj.parts],
                "values": vals.tolist()}
    if isinstance(obj, Hypergraph3):
        return {"kind": "hypergraph", "labels": [[_label_out(l) for l in ls] for ls in obj.labels],
                "edges": np.argwhere(obj.edges).tolist()}
    if isinstance(obj, GradedPartition):
        return {"kind": "partition", "k": obj.k, "d": obj.d, "sizes": list(obj.sizes),
                "labels": {_key(e): obj.labels[e].tolist() for e in obj.edges}}
    raise StructuralError(f"cannot serialise {type(obj).__name__}")


def from_json(obj: Dict[str, Any]):
    if not isinstance(obj, dict) or obj.get("kind") not in KINDS:
        raise StructuralError(f"unknown or missing kind; expected one of {KINDS}")
    kind = obj["kind"]
    try:
        if kind == "average":
            parts = tuple(part_from_json(p) for p in obj["parts"])
            omega = part_from_json(obj["omega"])
            fams = {}
            for ek, fam in obj["families"].items():
                fams[_unkey(ek)] = {_unkey(tk): frozenset(sub) for tk, sub in fam.items()}
            return AverageSystem(int(obj["k"]), int(obj["d"]), parts, omega, fams)
        if kind == "ternary":
            parts = tuple(part_from_json(p, seq=True) for p in obj["parts"])
            orders = None
            if "orders" in obj:
                orders = tuple(tuple(tuple(int(c) for c in s) for s in o) for o in obj["orders"])
            return TernaryInstance(int(obj["n"]), parts, int(obj.get("p", 3)), orders)
        if kind == "function":
            parts = tuple(part_from_json(p) for p in obj["parts"])
            vals = np.array(obj["values"], dtype=object)
            fr = np.vectorize(to_rational, otypes=[object])(vals)
            return PartiteFunction.from_fractions(parts, fr)
        if kind == "hypergraph":
            labels = tuple(tuple(ls) for ls in obj["labels"])
            E = np.zeros(tuple(len(l) for l in labels), dtype=bool)
            for t in obj["edges"]:
                E[tuple(t)] = True
            return Hypergraph3(labels, E)
        labels = {_unkey(ek): np.array(v, dtype=np.int64) for ek, v in obj["labels"].items()}
        return GradedPartition(int(obj["k"]), int(obj["d"]), obj["sizes"], labels)
    except KeyError as exc:
        raise StructuralError(f"missing key {exc} in {kind} file") from None


def read(path: str):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructuralError(f"{path}: not valid JSON ({exc})") from None
    return from_json(obj)


def write(obj, path: str) -> None:
    data = obj if isinstance(obj, dict) else to_json(obj)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")
