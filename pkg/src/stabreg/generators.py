"""Instance families: averages of set families, the four-point parity
encoding, GS_p(n), half-simplex grids, simple-function discretisation of
function families, and seeded random average systems.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .core import (ContractError, ParameterError, PartiteFunction, StructuralError,
                   WeightedPart, common_denominator, d_subsets, to_rational)

Seq = Tuple[int, ...]


def _mask_measures(omega: WeightedPart) -> Tuple[np.ndarray, int]:
    """Integer measure of every subset of omega, indexed by bitmask."""
    nums, den = omega.int_weights()
    m = len(omega)
    table = np.zeros(1 << m, dtype=np.int64)
    for bit in range(m):
        step = 1 << bit
        table[step:2 * step] = table[:step] + int(nums[bit])
    return table, den


@dataclass
class AverageSystem:
    """``f(x) = mu(cap_e P^e_{x_e})`` for set families indexed by d-ary sub-tuples.

    ``families[e]`` maps an index tuple over the coordinates in ``e`` to a
    frozenset of omega labels.
    """

    k: int
    d: int
    parts: Tuple[WeightedPart, ...]
    omega: WeightedPart
    families: Dict[Tuple[int, ...], Dict[Tuple[int, ...], FrozenSet]]
    _masks: Dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.d < self.k:
            raise StructuralError("need 1 <= d < k")
        if len(self.parts) != self.k:
            raise StructuralError("need one part per coordinate")
        self.parts = tuple(self.parts)
        for e in d_subsets(self.k, self.d):
            fam = self.families.get(e)
            if fam is None:
                raise StructuralError(f"missing family for e={e}")
            for t in itertools.product(*(range(len(self.parts[i])) for i in e)):
                if t not in fam:
                    raise StructuralError(f"missing family entry {t} for e={e}")
                if not set(fam[t]) <= set(self.omega.labels):
                    raise StructuralError(f"family entry {t} for e={e} leaves omega")

    @property
    def edges(self):
        return d_subsets(self.k, self.d)

    def masks(self, e) -> np.ndarray:
        """Bitmask array (axis per coordinate of ``e``) of the family sets."""
        if self._masks is None:
            self._masks = {}
        if e not in self._masks:
            pos = self.omega.index
            shape = tuple(len(self.parts[i]) for i in e)
            arr = np.zeros(shape, dtype=np.int64)
            for t, sub in self.families[e].items():
                arr[t] = sum(1 << pos[z] for z in sub)
            self._masks[e] = arr
        return self._masks[e]

    def to_function(self) -> PartiteFunction:
        if len(self.omega) > 24:
            raise ParameterError("dense evaluation supports |omega| <= 24")
        shape = tuple(len(p) for p in self.parts)
        acc = np.full(shape, (1 << len(self.omega)) - 1, dtype=np.int64)
        for e in self.edges:
            view = [1] * self.k
            for i in e:
                view[i] = shape[i]
            acc = acc & self.masks(e).reshape(view)
        table, den = _mask_measures(self.omega)
        return PartiteFunction(self.parts, table[acc], den)


def eval_average(system: AverageSystem, x: Sequence) -> Fraction:
    """Measure of the intersection of the family sets at the sub-tuples of ``x`` (labels)."""
    if len(x) != system.k:
        raise StructuralError("tuple has wrong arity")
    idx = []
    for part, lab in zip(system.parts, x):
        if lab not in part.index:
            raise StructuralError(f"label {lab!r} not in part")
        idx.append(part.index[lab])
    common = set(system.omega.labels)
    for e in system.edges:
        sub = tuple(idx[i] for i in e)
        try:
            common &= set(system.families[e][sub])
        except KeyError:
            raise StructuralError(f"missing family entry {sub} for e={e}") from None
    return sum((system.omega.weight(z) for z in common), Fraction(0))


def gen_parity_system(parts: Sequence[WeightedPart], g12, g13, g23) -> AverageSystem:
    """Four-point encoding whose average is 1/4 on odd-edge triples and 0 otherwise.

    ``g12`` etc. are collections of label pairs (edges of the graphs on
    X x Y, X x Z and Y x Z).
    """
    omega = WeightedPart.uniform("abcd")
    X, Y, Z = parts
    on = {(0, 1): ({"a", "b"}, {"c", "d"}),
          (0, 2): ({"a", "c"}, {"b", "d"}),
          (1, 2): ({"a", "d"}, {"b", "c"})}
    graphs = {(0, 1): set(map(tuple, g12)), (0, 2): set(map(tuple, g13)),
              (1, 2): set(map(tuple, g23))}
    families = {}
    for e, (yes, no) in on.items():
        pa, pb = parts[e[0]], parts[e[1]]
        fam = {}
        for i, a in enumerate(pa.labels):
            for j, b in enumerate(pb.labels):
                fam[(i, j)] = frozenset(yes if (a, b) in graphs[e] else no)
        families[e] = fam
    return AverageSystem(3, 2, tuple(parts), omega, families)


def gs_edge(p: int, x: Sequence[int], y: Sequence[int], z: Sequence[int]) -> bool:
    """Edge of GS_p: the first nonzero coordinate sum (mod p) equals 1."""
    if not len(x) == len(y) == len(z):
        raise StructuralError("sequences must have equal length")
    for a, b, c in zip(x, y, z):
        s = (a + b + c) % p
        if s:
            return s == 1
    return False


def halfsimplex_edge(x, y, z) -> bool:
    vals = [to_rational(v) for v in (x, y, z)]
    if any(not 0 <= v <= 1 for v in vals):
        raise StructuralError("half-simplex coordinates lie in [0, 1]")
    return sum(vals) >= 1


def gs_edge_tensor(p: int, A: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Vectorised ``gs_edge`` over all triples of rows of A, B, C."""
    n = A.shape[1] if A.ndim == 2 else 0
    shape = (len(A), len(B), len(C))
    if 0 in shape or n == 0:
        return np.zeros(shape, dtype=bool)
    s = (A[:, None, None, :] + B[None, :, None, :] + C[None, None, :, :]) % p
    nz = s != 0
    first = nz.argmax(axis=-1)
    val = np.take_along_axis(s, first[..., None], axis=-1)[..., 0]
    return nz.any(axis=-1) & (val == 1)


@dataclass
class Hypergraph3:
    """A 3-partite 3-hypergraph: labels per part and a dense boolean edge tensor."""

    labels: Tuple[Tuple, Tuple, Tuple]
    edges: np.ndarray

    def __post_init__(self):
        self.labels = tuple(tuple(l) for l in self.labels)
        self.edges = np.asarray(self.edges, dtype=bool)
        if self.edges.shape != tuple(len(l) for l in self.labels):
            raise StructuralError("edge tensor shape does not match the parts")

    @property
    def sizes(self):
        return self.edges.shape

    def induced(self, keep: Sequence[Sequence[int]]) -> "Hypergraph3":
        a, b, c = (list(k) for k in keep)
        labels = tuple(tuple(self.labels[u][i] for i in ks) for u, ks in enumerate((a, b, c)))
        return Hypergraph3(labels, self.edges[np.ix_(a, b, c)])


@dataclass
class TernaryInstance:
    """Three parts of length-n sequences over F_p with exact weights.

    ``orders``, when given, lists each part's labels from smallest to largest
    (a monotonicity witness).
    """

    n: int
    parts: Tuple[WeightedPart, WeightedPart, WeightedPart]
    p: int = 3
    orders: Optional[Tuple[Tuple[Seq, ...], ...]] = None

    def __post_init__(self):
        if self.n < 1:
            raise StructuralError("depth must be positive")
        if len(self.parts) != 3:
            raise StructuralError("ternary instances have three parts")
        self.parts = tuple(self.parts)
        for part in self.parts:
            for s in part.labels:
                if len(s) != self.n or any(not 0 <= c < self.p for c in s):
                    raise StructuralError(f"bad sequence {s!r} for F_{self.p}^{self.n}")
        if self.orders is not None:
            self.orders = tuple(tuple(tuple(s) for s in o) for o in self.orders)
            for part, order in zip(self.parts, self.orders):
                if sorted(order) != sorted(part.labels):
                    raise StructuralError("order is not a permutation of the part")

    def array(self, u: int) -> np.ndarray:
        labels = self.parts[u].labels
        return np.array(labels, dtype=np.int64).reshape(len(labels), self.n)

    def edge_tensor(self) -> np.ndarray:
        return gs_edge_tensor(self.p, self.array(0), self.array(1), self.array(2))

    def hypergraph(self) -> Hypergraph3:
        return Hypergraph3(tuple(p.labels for p in self.parts), self.edge_tensor())

    def with_orders(self, orders) -> "TernaryInstance":
        return TernaryInstance(self.n, self.parts, self.p, tuple(orders))


def gen_gs_instance(p: int, n: int, subsets=None, weights=None) -> TernaryInstance:
    """Induced sub-hypergraph of GS_p(n) on the given per-part subsets.

    ``subsets[u]`` defaults to all of F_p^n; ``weights[u]`` (a sequence
    aligned with the subset, or a dict) defaults to uniform.
    """
    full = list(itertools.product(range(p), repeat=n))
    parts = []
    for u in range(3):
        seqs = full if subsets is None or subsets[u] is None else [tuple(s) for s in subsets[u]]
        if weights is None or weights[u] is None:
            part = WeightedPart.uniform(seqs) if seqs else WeightedPart((), ())
        else:
            w = weights[u]
            ws = [w[s] for s in seqs] if isinstance(w, dict) else list(w)
            part = WeightedPart(seqs, ws)
        parts.append(part)
    return TernaryInstance(n, tuple(parts), p)


def gen_halfsimplex_grid(m: int) -> Hypergraph3:
    """Half-simplex restricted to ``{0, 1/(m-1), ..., 1}`` in each part."""
    pts = tuple(Fraction(i, m - 1) for i in range(m))
    idx = np.arange(m)
    tot = idx[:, None, None] + idx[None, :, None] + idx[None, None, :]
    return Hypergraph3((pts, pts, pts), tot >= m - 1)


# --- function families and their simple-function discretisation -------------

@dataclass
class FunctionFamily:
    """``f^e_x: omega -> [0,1]`` for every e-tuple x.

    ``values[e]`` is an object array of Fractions with one axis per coordinate
    of ``e`` followed by an omega axis.
    """

    k: int
    d: int
    parts: Tuple[WeightedPart, ...]
    omega: WeightedPart
    values: Dict[Tuple[int, ...], np.ndarray]

    def __post_init__(self):
        self.parts = tuple(self.parts)
        for e in d_subsets(self.k, self.d):
            arr = self.values[e]
            want = tuple(len(self.parts[i]) for i in e) + (len(self.omega),)
            if arr.shape != want:
                raise StructuralError(f"values for e={e} have shape {arr.shape}, want {want}")
            if any(not 0 <= v <= 1 for v in arr.ravel()):
                raise StructuralError("function values must lie in [0, 1]")

    @property
    def edges(self):
        return d_subsets(self.k, self.d)

    @classmethod
    def from_average(cls, system: AverageSystem) -> "FunctionFamily":
        """Indicator functions of the family sets."""
        vals = {}
        m = len(system.omega)
        for e in system.edges:
            masks = system.masks(e)
            arr = np.empty(masks.shape + (m,), dtype=object)
            for idx in np.ndindex(*masks.shape):
                for z in range(m):
                    arr[idx + (z,)] = Fraction((int(masks[idx]) >> z) & 1)
            vals[e] = arr
        return cls(system.k, system.d, system.parts, system.omega, vals)


def discretize_function_family(ff: FunctionFamily, n: int) -> Dict[Tuple[int, ...], np.ndarray]:
    """Level index ``i`` with ``s = i / 2^n = floor(f 2^n) / 2^n`` for every value.

    Returns integer arrays of the same shape as ``ff.values[e]``; levels run
    over ``0..2^n`` so that ``|f - s| < 2^-n`` pointwise.
    """
    if n <= 0:
        raise ParameterError("resolution must be positive")
    scale = 2 ** n
    out = {}
    for e, arr in ff.values.items():
        lev = np.empty(arr.shape, dtype=np.int64)
        for idx in np.ndindex(*arr.shape):
            lev[idx] = math.floor(arr[idx] * scale)
        out[e] = lev
    return out


def _output_level(value: Fraction, n_out: int) -> int:
    return math.floor(value * 2 ** n_out)


@dataclass
class LevelDecomposition:
    """``J[i]``: input level tuples whose combined value falls in output level ``i``."""

    n: int
    n_out: int
    J: Dict[int, FrozenSet[Tuple[int, ...]]]
    h_values: Dict[Tuple[int, ...], Fraction]


def level_set_decompose(h: Callable, levels: Dict[Tuple[int, ...], np.ndarray], n: int,
                        n_out: int, k: int, d: int) -> LevelDecomposition:
    """Group realised input-level combinations by the output level of ``h``.

    ``J[i]`` is restricted to combinations that occur somewhere in the
    instance; this is all the decomposition identity needs.  The identity is
    then re-checked pointwise over every tuple and every omega point.
    """
    edges = d_subsets(k, d)
    sizes = {}
    for e in edges:
        for a, i in enumerate(e):
            sizes[i] = levels[e].shape[a]
    shape = tuple(sizes[i] for i in range(k))
    m = levels[edges[0]].shape[-1]
    scale = Fraction(1, 2 ** n)

    def combo_array():
        cols = []
        for e in edges:
            view = [1] * k + [m]
            for i in e:
                view[i] = shape[i]
            cols.append(np.broadcast_to(levels[e].reshape(view), shape + (m,)))
        return np.stack(cols, axis=-1)

    combos = combo_array().reshape(-1, len(edges))
    uniq = {tuple(int(v) for v in row) for row in np.unique(combos, axis=0)} if combos.size else set()
    h_values = {}
    J: Dict[int, set] = {}
    for c in sorted(uniq):
        val = to_rational(h(tuple(scale * i for i in c)))
        if not 0 <= val <= 1:
            raise ContractError(f"combiner left [0,1]: h{c} = {val}")
        h_values[c] = val
        J.setdefault(_output_level(val, n_out), set()).add(c)
    dec = LevelDecomposition(n, n_out, {i: frozenset(s) for i, s in J.items()}, h_values)
    _validate_decomposition(dec, combos)
    return dec


def _validate_decomposition(dec: LevelDecomposition, combos: np.ndarray) -> None:
    owner = {c: i for i, cs in dec.J.items() for c in cs}
    for row in combos:
        c = tuple(int(v) for v in row)
        direct = _output_level(dec.h_values[c], dec.n_out)
        if owner.get(c) != direct:
            raise ContractError(f"level decomposition mismatch at {c}")


def level_set_estimate(ff: FunctionFamily, h: Callable, n: int, n_out: int) -> PartiteFunction:
    """``sum_i (i / 2^n_out) mu(g-level i)`` with each level measured through ``J_i``.

    Each level-set measure is the sum, over the combinations in ``J_i``, of the
    measure of the intersection of the input level sets.
    """
    levels = discretize_function_family(ff, n)
    dec = level_set_decompose(h, levels, n, n_out, ff.k, ff.d)
    edges = ff.edges
    shape = tuple(len(p) for p in ff.parts)
    wts = ff.omega.weights
    out = np.empty(shape, dtype=object)
    for x in itertools.product(*(range(s) for s in shape)):
        # level-set indicator of each input, as the set of omega points per level
        sets_by_e = []
        for e in edges:
            row = levels[e][tuple(x[i] for i in e)]
            by_level: Dict[int, set] = {}
            for z, lv in enumerate(row):
                by_level.setdefault(int(lv), set()).add(z)
            sets_by_e.append(by_level)
        total = Fraction(0)
        for i, combos in dec.J.items():
            mass = Fraction(0)
            for c in combos:
                common = None
                for by_level, lv in zip(sets_by_e, c):
                    s = by_level.get(lv, set())
                    common = s if common is None else common & s
                    if not common:
                        break
                if common:
                    mass += sum(wts[z] for z in common)
            total += Fraction(i, 2 ** n_out) * mass
        out[x] = total
    return PartiteFunction.from_fractions(ff.parts, out)


def direct_integral(ff: FunctionFamily, h: Callable) -> PartiteFunction:
    """``int h((f^e_{x_e}(z))_e) dmu(z)`` evaluated exactly."""
    shape = tuple(len(p) for p in ff.parts)
    out = np.empty(shape, dtype=object)
    for x in itertools.product(*(range(s) for s in shape)):
        tot = Fraction(0)
        for z, w in enumerate(ff.omega.weights):
            if w:
                args = tuple(ff.values[e][tuple(x[i] for i in e) + (z,)] for e in ff.edges)
                tot += w * to_rational(h(args))
        out[x] = tot
    return PartiteFunction.from_fractions(ff.parts, out)


def product_combiner(args) -> Fraction:
    return math.prod(args, start=Fraction(1))


# --- seeded random systems --------------------------------------------------

def philox(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed)))


def gen_random_average(seed: int, sizes: Sequence[int], omega_size: int, density,
                       d: Optional[int] = None) -> AverageSystem:
    """Random average system; each omega point joins each family set independently.

    Stream layout: for ``e`` in lexicographic order of ``C([k], d)``, one
    block of integers in ``[0, den)`` with shape ``(prod_{i in e} |X_i|, |omega|)``
    (C order); a point is included when its integer is ``< num`` where
    ``density = num/den``.
    """
    density = to_rational(density)
    if not 0 <= density <= 1:
        raise ParameterError("density must lie in [0, 1]")
    if any(s <= 0 for s in sizes) or omega_size <= 0:
        raise ParameterError("sizes must be positive")
    k = len(sizes)
    d = k - 1 if d is None else d
    rng = philox(seed)
    parts = tuple(WeightedPart.uniform(range(s)) for s in sizes)
    omega = WeightedPart.uniform(range(omega_size))
    families = {}
    for e in d_subsets(k, d):
        tuples = list(itertools.product(*(range(sizes[i]) for i in e)))
        draws = rng.integers(0, density.denominator, size=(len(tuples), omega_size))
        inc = draws < density.numerator
        families[e] = {t: frozenset(np.flatnonzero(inc[r]).tolist()) for r, t in enumerate(tuples)}
    return AverageSystem(k, d, parts, omega, families)


def random_graph(rng: np.random.Generator, n1: int, n2: int, density=Fraction(1, 2)) -> np.ndarray:
    density = to_rational(density)
    return rng.integers(0, density.denominator, size=(n1, n2)) < density.numerator
