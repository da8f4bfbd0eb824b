"""Ternary prefix trees with exact masses, presence and order ranks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from ..core import StructuralError
from ..generators import TernaryInstance

Seq = Tuple[int, ...]
INF = math.inf


def i_sum(sigma: Sequence[int], tau: Sequence[int]) -> Seq:
    """Pointwise ``-(sigma + tau)`` mod 3: the third sequence making every sum 0."""
    if len(sigma) != len(tau):
        raise StructuralError("sequences must have equal length")
    return tuple((-(a + b)) % 3 for a, b in zip(sigma, tau))


class PrefixTree:
    """Every prefix of every member of one part, with mass, presence and ranks.

    ``rank[label]`` is the position of a member in the supplied linear order;
    ``lo[σ]`` / ``hi[σ]`` are the least and greatest ranks inside ``[σ]``.
    """

    def __init__(self, labels: Sequence[Seq], weights: Sequence[Fraction], n: int,
                 order: Optional[Sequence[Seq]] = None):
        self.n = n
        self.labels = tuple(tuple(s) for s in labels)
        self.weights = tuple(weights)
        order = sorted(self.labels) if order is None else [tuple(s) for s in order]
        self.rank = {s: r for r, s in enumerate(order)}
        self.mass: Dict[Seq, Fraction] = {}
        self.children: Dict[Seq, set] = {}
        self.lo: Dict[Seq, int] = {}
        self.hi: Dict[Seq, int] = {}
        for s, w in zip(self.labels, self.weights):
            r = self.rank[s]
            for ell in range(n + 1):
                p = s[:ell]
                self.mass[p] = self.mass.get(p, Fraction(0)) + w
                self.lo[p] = min(self.lo.get(p, r), r)
                self.hi[p] = max(self.hi.get(p, r), r)
                if ell < n:
                    self.children.setdefault(p, set()).add(s[ell])

    def present(self, sigma: Seq) -> bool:
        return tuple(sigma) in self.mass

    def mu(self, sigma: Seq) -> Fraction:
        return self.mass.get(tuple(sigma), Fraction(0))

    def directions(self, sigma: Seq) -> List[int]:
        """Present extension digits of ``sigma``."""
        return sorted(self.children.get(tuple(sigma), ()))

    def positive_directions(self, sigma: Seq) -> List[int]:
        sigma = tuple(sigma)
        return [j for j in self.directions(sigma) if self.mu(sigma + (j,)) > 0]

    def non_splitting(self, sigma: Seq) -> bool:
        return self.present(sigma) and len(self.directions(sigma)) == 1

    def splits(self, sigma: Seq) -> bool:
        return self.present(sigma) and len(self.directions(sigma)) >= 2

    def extension(self, sigma: Seq) -> int:
        dirs = self.directions(sigma)
        if len(dirs) != 1:
            raise StructuralError(f"{sigma} has no unique extension")
        return dirs[0]

    def large_split(self, sigma: Seq) -> bool:
        return len(self.positive_directions(sigma)) >= 2

    def all_below(self, a: Seq, b: Seq) -> bool:
        """Every member of ``[a]`` precedes every member of ``[b]`` (both present)."""
        return self.hi[tuple(a)] < self.lo[tuple(b)]

    def some_below(self, a: Seq, b: Seq) -> bool:
        return self.lo[tuple(a)] < self.hi[tuple(b)]

    def prefixes(self, length: int, positive: bool = False) -> List[Seq]:
        return sorted(p for p, m in self.mass.items()
                      if len(p) == length and (m > 0 or not positive))

    def members_under(self, sigma: Seq) -> np.ndarray:
        sigma = tuple(sigma)
        k = len(sigma)
        return np.array([s[:k] == sigma for s in self.labels], dtype=bool)


@dataclass(frozen=True)
class SplitSignature:
    sigma: Seq
    non_splitting: bool
    extension: Optional[int]
    directions: Tuple[int, ...]
    positive: Tuple[int, ...]
    large: bool
    ordered_pair: Optional[Tuple[int, int]]  # (j1, j2) with [σ⌢j1] entirely below [σ⌢j2]


def classify_prefix(tree: PrefixTree, sigma: Seq) -> SplitSignature:
    sigma = tuple(sigma)
    if not tree.present(sigma):
        raise StructuralError(f"prefix {sigma} is not present")
    if len(sigma) >= tree.n:
        raise StructuralError("full-length sequences have no extensions")
    dirs = tuple(tree.directions(sigma))
    pos = tuple(tree.positive_directions(sigma))
    pair = None
    if len(dirs) == 2:
        a, b = (sigma + (dirs[0],), sigma + (dirs[1],))
        if tree.all_below(a, b):
            pair = (dirs[0], dirs[1])
        elif tree.all_below(b, a):
            pair = (dirs[1], dirs[0])
    return SplitSignature(sigma, len(dirs) == 1, dirs[0] if len(dirs) == 1 else None,
                          dirs, pos, len(pos) >= 2, pair)


def compute_ix(tree: PrefixTree, x: Seq):
    """Least ``i`` with ``mu([x|i]) = 0``, or ``inf`` for atoms.

    On a finite instance ``[x|n] = {x}``, so the limit case cannot occur.
    """
    x = tuple(x)
    if x not in tree.rank:
        raise StructuralError(f"{x} is not a member of the part")
    for i in range(tree.n + 1):
        if tree.mu(x[:i]) == 0:
            return i
    return INF


class Gs3Context:
    """Prefix trees of the three parts plus the GS_3 edge tensor."""

    def __init__(self, inst: TernaryInstance):
        if inst.p != 3:
            raise StructuralError("the prefix-tree pipeline is specific to p = 3")
        self.inst = inst
        self.n = inst.n
        orders = inst.orders or (None, None, None)
        self.trees = tuple(PrefixTree(p.labels, p.weights, inst.n, o)
                           for p, o in zip(inst.parts, orders))
        self.labels = tuple(p.labels for p in inst.parts)
        self.ix = tuple({x: compute_ix(t, x) for x in t.labels} for t in self.trees)
        self._edges = None

    @property
    def edges(self) -> np.ndarray:
        if self._edges is None:
            self._edges = self.inst.edge_tensor()
        return self._edges

    def large_split_lengths(self) -> FrozenSet[int]:
        out = set()
        for t in self.trees:
            for p in t.mass:
                if len(p) < self.n and t.large_split(p):
                    out.add(len(p))
        return frozenset(out)
