"""Ground data model: weighted partite grounds, exact functions on products,
graded partitions of d-ary products and their cylinder cells.

Every measure in the package is an exact :class:`fractions.Fraction`.  Large
arrays keep integer numerators over a shared denominator so that numpy can do
the bookkeeping without ever touching floating point.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

Rational = Fraction


class StructuralError(ValueError):
    """Input does not have the shape an operation requires."""


class DegenerateInputError(ValueError):
    pass


class ParameterError(ValueError):
    pass


class ContractError(ValueError):
    """A caller-side promise (null ledger, black-box range, ...) was broken."""


class CapExceeded(ValueError):
    """Exhaustive routine refused because the instance is above its size cap."""


def to_rational(value) -> Fraction:
    """Parse ints, Fractions, ``"num/den"`` strings and ``[num, den]`` pairs."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise StructuralError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise StructuralError(f"not a rational: {value!r}") from exc
    if isinstance(value, (list, tuple)) and len(value) == 2:
        num, den = value
        if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
            raise StructuralError(f"bad [num, den] pair: {value!r}")
        return Fraction(num, den)
    raise StructuralError(f"not a rational: {value!r}")


def rational_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def common_denominator(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den


def _int_array(values: Sequence[int]) -> np.ndarray:
    """int64 when every product we form stays exact, object ints otherwise."""
    if values and max(abs(v) for v in values) >= 2**20:
        return np.array(values, dtype=object)
    return np.array(values, dtype=np.int64)


@dataclass(frozen=True)
class WeightedPart:
    """A finite vertex set with exact nonnegative weights summing to one.

    Zero weights are allowed; such points are the finite stand-in for a
    null set.
    """

    labels: Tuple
    weights: Tuple[Fraction, ...]
    index: Dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        weights = tuple(to_rational(w) for w in self.weights)
        if len(labels) != len(weights):
            raise StructuralError("labels and weights differ in length")
        if len(set(labels)) != len(labels):
            raise StructuralError("labels are not distinct")
        if any(w < 0 for w in weights):
            raise StructuralError("negative weight")
        if labels and sum(weights) != 1:
            raise StructuralError(f"weights sum to {sum(weights)}, not 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "index", {lab: i for i, lab in enumerate(labels)})

    @classmethod
    def uniform(cls, labels: Iterable) -> "WeightedPart":
        labels = tuple(labels)
        n = len(labels)
        return cls(labels, tuple(Fraction(1, n) for _ in labels))

    def __len__(self) -> int:
        return len(self.labels)

    def weight(self, label) -> Fraction:
        try:
            return self.weights[self.index[label]]
        except KeyError:
            raise StructuralError(f"label {label!r} not in part") from None

    def int_weights(self) -> Tuple[np.ndarray, int]:
        """Numerators over a common denominator: ``weights == nums / den``."""
        den = common_denominator(self.weights)
        nums = [int(w * den) for w in self.weights]
        return _int_array(nums), den


@dataclass(frozen=True)
class BudgetFn:
    """``F: N -> (0,1]``: constant ``c``, reciprocal ``c/m`` or exponential ``c 2^-m``."""

    kind: str
    c: Fraction

    KINDS = ("constant", "reciprocal", "exponential")

    def __post_init__(self):
        c = to_rational(self.c)
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown budget kind {self.kind!r}")
        if not 0 < c <= 1:
            raise ParameterError("budget constant must lie in (0, 1]")
        object.__setattr__(self, "c", c)

    def __call__(self, m: int) -> Fraction:
        if m < 1:
            raise ParameterError("budget is evaluated on positive integers")
        if self.kind == "constant":
            return self.c
        if self.kind == "reciprocal":
            return self.c / m
        return self.c / 2**m

    @classmethod
    def parse(cls, text: str) -> "BudgetFn":
        """``const:1/4``, ``recip:1/2`` or ``exp:1``."""
        aliases = {"const": "constant", "constant": "constant", "recip": "reciprocal",
                   "reciprocal": "reciprocal", "exp": "exponential",
                   "exponential": "exponential"}
        kind, _, c = text.partition(":")
        if kind not in aliases or not c:
            raise ParameterError(f"bad budget spec {text!r}")
        return cls(aliases[kind], to_rational(c))

    def spec(self) -> str:
        short = {"constant": "const", "reciprocal": "recip", "exponential": "exp"}
        return f"{short[self.kind]}:{rational_str(self.c)}"


def product_weights(parts: Sequence[WeightedPart]) -> Tuple[np.ndarray, int]:
    """Dense integer product measure on ``prod parts`` and its denominator."""
    ints = [part.int_weights() for part in parts]
    den = math.prod(d for _, d in ints)
    big = den >= 2**62
    arr = np.ones((), dtype=object if big else np.int64)
    for nums, _ in ints:
        arr = np.multiply.outer(arr, nums.astype(object) if big else nums)
    return arr, den


class PartiteFunction:
    """An exact function ``prod X_i -> [0,1]`` stored densely.

    ``numer / denom`` gives the values; ``numer`` has one axis per part.
    """

    def __init__(self, parts: Sequence[WeightedPart], numer: np.ndarray, denom: int):
        self.parts = tuple(parts)
        numer = np.asarray(numer)
        shape = tuple(len(p) for p in self.parts)
        if numer.shape != shape:
            raise StructuralError(f"value array shape {numer.shape} != ground {shape}")
        if denom <= 0:
            raise StructuralError("denominator must be positive")
        if numer.size and (numer.min() < 0 or numer.max() > denom):
            raise StructuralError("values must lie in [0, 1]")
        self.numer = numer
        self.denom = int(denom)

    @classmethod
    def from_fractions(cls, parts: Sequence[WeightedPart], values) -> "PartiteFunction":
        arr = np.asarray(values, dtype=object)
        flat = [to_rational(v) for v in arr.ravel()]
        den = common_denominator(flat)
        nums = [int(v * den) for v in flat]
        numer = _int_array(nums).reshape(arr.shape) if flat else np.zeros(arr.shape, np.int64)
        return cls(parts, numer, den)

    @classmethod
    def from_callable(cls, parts: Sequence[WeightedPart], fn) -> "PartiteFunction":
        shape = tuple(len(p) for p in parts)
        vals = np.empty(shape, dtype=object)
        for idx in itertools.product(*(range(n) for n in shape)):
            vals[idx] = to_rational(fn(*(p.labels[i] for p, i in zip(parts, idx))))
        return cls.from_fractions(parts, vals)

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.numer.shape

    def value(self, idx: Sequence[int]) -> Fraction:
        return Fraction(int(self.numer[tuple(idx)]), self.denom)

    def value_at(self, labels: Sequence) -> Fraction:
        idx = []
        for part, lab in zip(self.parts, labels):
            if lab not in part.index:
                raise StructuralError(f"label {lab!r} not in part")
            idx.append(part.index[lab])
        return self.value(idx)

    def is_indicator(self) -> bool:
        return bool(np.all((self.numer == 0) | (self.numer == self.denom)))

    def fractions(self) -> np.ndarray:
        out = np.empty(self.shape, dtype=object)
        for idx in np.ndindex(*self.shape):
            out[idx] = Fraction(int(self.numer[idx]), self.denom)
        return out


def d_subsets(k: int, d: int) -> List[Tuple[int, ...]]:
    """``C([k], d)`` as sorted index tuples, in lexicographic order."""
    return list(itertools.combinations(range(k), d))


class GradedPartition:
    """Per ``e`` in ``C([k], d)``, a partition of ``prod_{i in e} X_i``.

    Stored as one integer label array per ``e`` (axis per coordinate in
    ``e``); label 0 is the exceptional side ``S_{e,0}``, possibly empty.
    """

    def __init__(self, k: int, d: int, sizes: Sequence[int], labels: Dict[Tuple[int, ...], np.ndarray]):
        if not 1 <= d < k:
            raise StructuralError("need 1 <= d < k")
        self.k, self.d = k, d
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) != k:
            raise StructuralError("one size per coordinate required")
        self.edges = d_subsets(k, d)
        self.labels: Dict[Tuple[int, ...], np.ndarray] = {}
        for e in self.edges:
            if e not in labels:
                raise StructuralError(f"no partition given for e={e}")
            lab = np.asarray(labels[e], dtype=np.int64)
            want = tuple(self.sizes[i] for i in e)
            if lab.shape != want:
                raise StructuralError(f"labels for e={e} have shape {lab.shape}, want {want}")
            if lab.size and lab.min() < 0:
                raise StructuralError("negative part index")
            self.labels[e] = lab

    @classmethod
    def from_parts(cls, k: int, d: int, sizes: Sequence[int], parts_by_e) -> "GradedPartition":
        """Build from explicit part lists; validates disjointness and covering."""
        validate_partition(k, d, sizes, parts_by_e)
        labels = {}
        for e in d_subsets(k, d):
            lab = np.full(tuple(sizes[i] for i in e), -1, dtype=np.int64)
            for j, part in enumerate(parts_by_e[e]):
                for t in part:
                    lab[tuple(t)] = j
            labels[e] = lab
        return cls(k, d, sizes, labels)

    def b(self, e) -> int:
        lab = self.labels[e]
        return int(lab.max()) if lab.size else 0

    def max_b(self) -> int:
        return max(self.b(e) for e in self.edges)

    def parts(self, e) -> List[set]:
        lab = self.labels[e]
        out = [set() for _ in range(self.b(e) + 1)]
        for idx in np.ndindex(*lab.shape):
            out[int(lab[idx])].add(idx)
        return out

    def broadcast(self, e) -> np.ndarray:
        """Label array for ``e`` viewed on the full k-fold product."""
        shape = [1] * self.k
        for i in e:
            shape[i] = self.sizes[i]
        return np.broadcast_to(self.labels[e].reshape(shape), self.sizes)

    def cell_ids(self) -> Tuple[np.ndarray, List[Tuple[int, ...]]]:
        """Dense array of cell ids on the k-fold product, plus the id -> index map."""
        radix = [self.b(e) + 1 for e in self.edges]
        code = np.zeros(self.sizes, dtype=np.int64)
        for e, r in zip(self.edges, radix):
            code = code * r + self.broadcast(e)
        uniq, inv = np.unique(code, return_inverse=True)
        keys = []
        for c in uniq.tolist():
            idx = []
            for r in reversed(radix):
                idx.append(c % r)
                c //= r
            keys.append(tuple(reversed(idx)))
        return inv.reshape(self.sizes), keys


def validate_partition(k: int, d: int, sizes: Sequence[int], parts_by_e) -> None:
    """Raise :class:`StructuralError` unless each family is disjoint and covering."""
    for e in d_subsets(k, d):
        if e not in parts_by_e:
            raise StructuralError(f"no partition given for e={e}")
        dims = [range(sizes[i]) for i in e]
        seen = set()
        for j, part in enumerate(parts_by_e[e]):
            for t in part:
                t = tuple(t)
                if len(t) != len(e) or any(not 0 <= t[a] < sizes[i] for a, i in enumerate(e)):
                    raise StructuralError(f"tuple {t} outside the ground of e={e}")
                if t in seen:
                    raise StructuralError(f"parts overlap at {t} for e={e}")
                seen.add(t)
        total = math.prod(len(r) for r in dims)
        if len(seen) != total:
            raise StructuralError(f"parts for e={e} cover {len(seen)} of {total} tuples")


@dataclass(frozen=True)
class CylinderCell:
    """``indices[e] = j_e`` and the member k-tuples (as label tuples)."""

    indices: Dict[Tuple[int, ...], int]
    members: Tuple[Tuple, ...]


def cylinder_cells(partition: GradedPartition, parts: Sequence[WeightedPart],
                   include_exceptional: bool = False) -> Iterator[CylinderCell]:
    """Nonempty cylinder cells, members materialized as label tuples."""
    ids, keys = partition.cell_ids()
    buckets: Dict[int, list] = {}
    for idx in np.ndindex(*partition.sizes):
        buckets.setdefault(int(ids[idx]), []).append(idx)
    for cid, key in enumerate(keys):
        if not include_exceptional and 0 in key:
            continue
        members = tuple(tuple(parts[i].labels[t[i]] for i in range(partition.k))
                        for t in buckets.get(cid, ()))
        yield CylinderCell(dict(zip(partition.edges, key)), members)


def cell_measure(cell: CylinderCell, parts: Sequence[WeightedPart]) -> Fraction:
    total = Fraction(0)
    for t in cell.members:
        if len(t) != len(parts):
            raise StructuralError(f"tuple {t} has wrong arity")
        w = Fraction(1)
        for part, lab in zip(parts, t):
            w *= part.weight(lab)
        total += w
    return total


def shortest_covering_interval(values: Sequence[Fraction], masses: Sequence[Fraction],
                               budget: Fraction, strict: bool = False
                               ) -> Optional[Tuple[Tuple[Fraction, Fraction], Fraction]]:
    """Shortest closed ``[lo, hi]`` leaving at most ``budget`` mass outside.

    With ``strict=True`` the mass outside must be *strictly* below the budget;
    ``None`` is returned when that is impossible (budget 0).  Ties go to the
    leftmost interval.
    """
    if len(values) == 0:
        raise DegenerateInputError("empty multiset")
    if len(values) != len(masses):
        raise StructuralError("values and masses differ in length")
    agg: Dict[Fraction, Fraction] = {}
    for v, m in zip(values, masses):
        agg[v] = agg.get(v, 0) + m
    pts = sorted(agg.items())
    total = sum(m for _, m in pts)
    if total <= 0:
        raise DegenerateInputError("total mass must be positive")
    pts = [(v, m) for v, m in pts if m > 0]
    if budget < 0 or budget > total:
        raise ParameterError("budget must lie in [0, total mass]")
    need = total - budget

    def enough(covered):
        return covered > need if strict else covered >= need

    best = None
    j = 0
    covered = Fraction(0)
    for i in range(len(pts)):
        while j < len(pts) and (j <= i or not enough(covered)):
            covered += pts[j][1]
            j += 1
        if not enough(covered):
            break
        lo, hi = pts[i][0], pts[j - 1][0]
        if best is None or hi - lo < best[0][1] - best[0][0]:
            best = ((lo, hi), total - covered)
        covered -= pts[i][1]
    return best
