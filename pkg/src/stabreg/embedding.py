"""Monotonicity, half-simplex realizability, embeddings into GS_3(n), and a
sampler of monotone induced sub-hypergraphs of GS_3(n)."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import CapExceeded, StructuralError, WeightedPart
from .generators import Hypergraph3, TernaryInstance, gs_edge, gs_edge_tensor, philox


def _links(E: np.ndarray, u: int) -> np.ndarray:
    """Row ``x`` = the set of pairs completing ``x`` to an edge (flattened)."""
    return np.moveaxis(E, u, 0).reshape(E.shape[u], -1)


def _inclusion(N: np.ndarray) -> np.ndarray:
    """``S[a, b]`` iff link(a) ⊆ link(b)."""
    A = N.astype(np.int32)
    return (A @ (1 - A).T) == 0


@dataclass
class MonotoneResult:
    monotone: bool
    orders: Optional[Tuple[Tuple, Tuple, Tuple]] = None  # labels from smallest to largest
    obstruction: Optional[Tuple[int, object, object]] = None  # (part, x, x') with incomparable links


def check_monotone(H: Hypergraph3) -> MonotoneResult:
    """Monotone iff every part's link sets form a chain under inclusion.

    The witness order sorts each part by link size (ties by position).
    """
    E = H.edges
    orders = []
    for u in range(3):
        N = _links(E, u)
        S = _inclusion(N)
        bad = np.argwhere(~(S | S.T))
        if len(bad):
            a, b = (int(t) for t in bad[0])
            return MonotoneResult(False, None, (u, H.labels[u][a], H.labels[u][b]))
        sizes = N.sum(axis=1)
        perm = sorted(range(len(sizes)), key=lambda i: (int(sizes[i]), i))
        orders.append(tuple(H.labels[u][i] for i in perm))
    return MonotoneResult(True, tuple(orders))


def validate_monotone_witness(H: Hypergraph3, orders) -> bool:
    """For every edge and every ``x'`` above ``x`` in its part's order, the
    triple with ``x'`` is again an edge (checked for all three parts)."""
    E = H.edges
    for u in range(3):
        pos = {lab: i for i, lab in enumerate(H.labels[u])}
        perm = [pos[lab] for lab in orders[u]]
        if sorted(perm) != list(range(len(perm))):
            return False
        Es = np.take(E, perm, axis=u).astype(np.int8)
        # an edge at rank r persists at every higher rank iff the running max is attained
        if not np.array_equal(np.maximum.accumulate(Es, axis=u), Es):
            return False
    return True


# --- exact simplex ------------------------------------------------------------

def _pivot(T, rhs, obj, val, r, c):
    piv = T[r][c]
    T[r] = [a / piv for a in T[r]]
    rhs[r] /= piv
    row = T[r]
    for i in range(len(T)):
        f = T[i][c]
        if i != r and f:
            T[i] = [a - f * b for a, b in zip(T[i], row)]
            rhs[i] -= f * rhs[r]
    f = obj[c]
    if f:
        obj[:] = [a - f * b for a, b in zip(obj, row)]
        val += f * rhs[r]
    return val


def _run(T, rhs, obj, val, basis, allowed):
    """Bland's rule; returns (status, value)."""
    while True:
        enter = next((j for j in range(len(obj)) if allowed[j] and obj[j] > 0), None)
        if enter is None:
            return "optimal", val
        best = None
        for i in range(len(T)):
            if T[i][enter] > 0:
                ratio = rhs[i] / T[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded", val
        val = _pivot(T, rhs, obj, val, best[1], enter)
        basis[best[1]] = enter


def simplex_max(c: Sequence, A: Sequence[Sequence], b: Sequence):
    """Maximise ``c.x`` subject to ``A x <= b``, ``x >= 0``, exactly over Fractions.

    Returns ``("optimal", x, value)``, ``("infeasible", None, None)`` or
    ``("unbounded", None, None)``.
    """
    c = [Fraction(v) for v in c]
    m, n = len(A), len(c)
    neg = [i for i in range(m) if Fraction(b[i]) < 0]
    ncol = n + m + len(neg)
    T, rhs, basis = [], [], []
    for i in range(m):
        row = [Fraction(v) for v in A[i]] + [Fraction(0)] * (m + len(neg))
        bi = Fraction(b[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
            row[n + i] = Fraction(-1)
            k = n + m + neg.index(i)
            row[k] = Fraction(1)
            basis.append(k)
        else:
            row[n + i] = Fraction(1)
            basis.append(n + i)
        T.append(row)
        rhs.append(bi)
    art = set(range(n + m, ncol))
    if neg:
        obj = [Fraction(0)] * ncol
        val = Fraction(0)
        for i in range(m):
            if basis[i] in art:
                obj = [a + t for a, t in zip(obj, T[i])]
                val -= rhs[i]
        for k in art:
            obj[k] = Fraction(0)
        _, val = _run(T, rhs, obj, val, basis, [True] * ncol)
        if val < 0:
            return "infeasible", None, None
        for i in range(len(T)):
            if basis[i] in art:
                j = next((j for j in range(n + m) if T[i][j] != 0), None)
                if j is not None:
                    _pivot(T, rhs, [Fraction(0)] * ncol, Fraction(0), i, j)
                    basis[i] = j
    allowed = [j < n + m for j in range(ncol)]
    keep = [i for i in range(len(T)) if basis[i] not in art]
    T = [T[i] for i in keep]
    rhs = [rhs[i] for i in keep]
    basis = [basis[i] for i in keep]
    cost = c + [Fraction(0)] * (ncol - n)
    obj = list(cost)
    val = Fraction(0)
    for i, bi in enumerate(basis):
        if cost[bi]:
            obj = [a - cost[bi] * t for a, t in zip(obj, T[i])]
            val += cost[bi] * rhs[i]
    status, val = _run(T, rhs, obj, val, basis, allowed)
    if status != "optimal":
        return status, None, None
    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = rhs[i]
    return "optimal", x, val


@dataclass
class RealizabilityResult:
    realizable: bool
    values: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    margin: Fraction = Fraction(0)


def check_halfsimplex_realizable(H: Hypergraph3, cap: int = 512) -> RealizabilityResult:
    """Values in [0,1] with edges summing to ``>= 1`` and non-edges to ``<= 1 - m``;
    the margin ``m`` is maximised exactly and the instance is realizable iff ``m > 0``."""
    E = H.edges
    sizes = E.shape
    nvar = sum(sizes) + 1
    if E.size > cap:
        raise CapExceeded(f"{E.size} triples exceed the cap of {cap}")
    off = (0, sizes[0], sizes[0] + sizes[1])
    A, b = [], []
    for t in itertools.product(*(range(s) for s in sizes)):
        row = [0] * nvar
        for u in range(3):
            row[off[u] + t[u]] = 1
        if E[t]:
            A.append([-v for v in row])
            b.append(-1)
        else:
            row[-1] = 1
            A.append(row)
            b.append(1)
    for j in range(nvar):
        row = [0] * nvar
        row[j] = 1
        A.append(row)
        b.append(1)
    c = [0] * (nvar - 1) + [1]
    status, x, val = simplex_max(c, A, b)
    if status != "optimal" or val <= 0:
        return RealizabilityResult(False)
    vals = tuple(tuple(x[off[u]:off[u] + sizes[u]]) for u in range(3))
    res = RealizabilityResult(True, vals, val)
    if not validate_realization(H, res):
        raise StructuralError("simplex returned an invalid realization")
    return res


def validate_realization(H: Hypergraph3, res: RealizabilityResult) -> bool:
    a, b, c = res.values
    for t in itertools.product(*(range(s) for s in H.sizes)):
        s = a[t[0]] + b[t[1]] + c[t[2]]
        if H.edges[t] and s < 1:
            return False
        if not H.edges[t] and s > 1 - res.margin:
            return False
    return all(0 <= v <= 1 for part in res.values for v in part) and res.margin > 0


# --- embeddings into GS_3(n) -------------------------------------------------

@dataclass
class EmbeddingResult:
    found: bool
    maps: Optional[Tuple[Dict, Dict, Dict]] = None
    nodes: int = 0


def embed_into_gs3(H: Hypergraph3, n: int, cap: int = 200_000) -> EmbeddingResult:
    """Injective maps of the parts into F_3^n realising exactly the edges of H.

    Vertices are placed round-robin over the parts; each placement is checked
    against every triple it completes.
    """
    E = H.edges
    seqs = list(itertools.product(range(3), repeat=n))
    slots = []
    for k in range(max(H.sizes)):
        for u in range(3):
            if k < H.sizes[u]:
                slots.append((u, k))
    assign: List[Dict[int, Tuple]] = [{}, {}, {}]
    used = [set(), set(), set()]
    nodes = 0

    def consistent(u, k, s):
        others = [w for w in range(3) if w != u]
        for i in assign[others[0]]:
            for j in assign[others[1]]:
                t = [None] * 3
                t[u], t[others[0]], t[others[1]] = k, i, j
                seq = [None] * 3
                seq[u], seq[others[0]], seq[others[1]] = s, assign[others[0]][i], assign[others[1]][j]
                if gs_edge(3, *seq) != bool(E[tuple(t)]):
                    return False
        return True

    def rec(pos):
        nonlocal nodes
        if pos == len(slots):
            return True
        u, k = slots[pos]
        for s in seqs:
            if s in used[u]:
                continue
            nodes += 1
            if nodes > cap:
                raise CapExceeded(f"backtracking exceeded {cap} nodes")
            if consistent(u, k, s):
                assign[u][k] = s
                used[u].add(s)
                if rec(pos + 1):
                    return True
                del assign[u][k]
                used[u].discard(s)
        return False

    if not rec(0):
        return EmbeddingResult(False, None, nodes)
    maps = tuple({H.labels[u][k]: assign[u][k] for k in assign[u]} for u in range(3))
    if not validate_embedding(H, maps):
        raise StructuralError("backtracking produced an invalid embedding")
    return EmbeddingResult(True, maps, nodes)


def validate_embedding(H: Hypergraph3, maps) -> bool:
    for u in range(3):
        if len(set(maps[u].values())) != len(maps[u]):
            return False
    for t in itertools.product(*(range(s) for s in H.sizes)):
        seq = [maps[u][H.labels[u][t[u]]] for u in range(3)]
        if gs_edge(3, *seq) != bool(H.edges[t]):
            return False
    return True


# --- sampling -----------------------------------------------------------------

@dataclass
class SampleResult:
    instance: TernaryInstance
    tried: int
    accepted: int
    complete: bool  # every part reached its requested size

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.tried if self.tried else 1.0


def _is_monotone(E: np.ndarray) -> bool:
    for u in range(3):
        if E.shape[u] < 2:
            continue
        S = _inclusion(_links(E, u))
        if not (S | S.T).all():
            return False
    return True


def sample_common_sub(seed: int, n: int, sizes: Sequence[int], zero_fraction=Fraction(1, 5),
                      max_weight: int = 4) -> SampleResult:
    """Grow three subsets of F_3^n one candidate at a time, keeping a candidate
    only if the induced sub-hypergraph of GS_3(n) stays monotone.

    Random stream (Philox keyed by ``seed``): three candidate permutations of
    F_3^n, then per part the zero-weight positions, then the positive weights.
    At least ``zero_fraction`` of each part (rounded up) gets weight 0, and at
    least one point per part keeps positive weight.
    """
    rng = philox(seed)
    full = np.array(list(itertools.product(range(3), repeat=n)), dtype=np.int64)
    G = gs_edge_tensor(3, full, full, full)
    perms = [rng.permutation(len(full)) for _ in range(3)]
    chosen: List[List[int]] = [[], [], []]
    ptr = [0, 0, 0]
    tried = accepted = 0
    active = [sizes[u] > 0 for u in range(3)]
    while any(active):
        for u in range(3):
            if not active[u]:
                continue
            while ptr[u] < len(full):
                cand = int(perms[u][ptr[u]])
                ptr[u] += 1
                tried += 1
                trial = [list(c) for c in chosen]
                trial[u].append(cand)
                if all(trial) and not _is_monotone(G[np.ix_(*trial)]):
                    continue
                chosen[u].append(cand)
                accepted += 1
                break
            if len(chosen[u]) >= sizes[u] or ptr[u] >= len(full):
                active[u] = False
    if not all(chosen):
        raise CapExceeded(f"sampler could not populate every part (acceptance {accepted}/{tried})")
    parts = []
    zf = Fraction(zero_fraction)
    for u in range(3):
        m = len(chosen[u])
        k0 = min(math.ceil(zf * m), m - 1)
        zeros = set(rng.choice(m, size=k0, replace=False).tolist()) if k0 else set()
        raw = rng.integers(1, max_weight + 1, size=m)
        w = [0 if i in zeros else int(raw[i]) for i in range(m)]
        tot = sum(w)
        labels = [tuple(int(c) for c in full[i]) for i in chosen[u]]
        parts.append(WeightedPart(labels, [Fraction(x, tot) for x in w]))
    inst = TernaryInstance(n, tuple(parts), 3)
    res = check_monotone(inst.hypergraph())
    if not res.monotone:
        raise StructuralError("sampler produced a non-monotone instance")
    return SampleResult(inst.with_orders(res.orders), tried, accepted,
                        all(len(chosen[u]) >= sizes[u] for u in range(3)))
