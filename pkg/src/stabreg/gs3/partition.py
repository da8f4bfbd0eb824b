"""Assembly of the pair partitions 𝒫^{u,v}."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core import ContractError, StructuralError
from ..generators import TernaryInstance
from .classify import PairClassification, Tag, classify_pair, tag_name
from .rfamily import PAIRS, NullLedger, RFamily, Rect, build_ledger
from .tree import Gs3Context


@dataclass
class PairPartition:
    """Part label per pair of members; ``-1`` marks ledger pairs.

    ``fubini`` flags C<= pairs whose ``j''`` differs from ``y(i(x)-1)``; they
    stay in their class but are treated as ledger during verification.
    """

    u: int
    v: int
    labels: np.ndarray
    tags: List[Tag]
    ledger: np.ndarray
    fubini: np.ndarray
    rid: np.ndarray  # family member index per pair, -1 outside ℛ
    masses: List[Fraction]
    ledger_measure: Fraction

    @property
    def census(self) -> Dict[str, int]:
        c = Counter()
        flat = self.labels.ravel()
        for k, n in zip(*np.unique(flat[flat >= 0], return_counts=True)):
            t = self.tags[int(k)]
            c[tag_name(t) if t[0] != "A" else "A"] += int(n)
        if self.ledger.any():
            c["Null(ledger)"] = int(self.ledger.sum())
        return dict(sorted(c.items()))

    @property
    def fubini_count(self) -> int:
        return int(self.fubini.sum())

    def verification_ledger(self) -> np.ndarray:
        return self.ledger | self.fubini

    def total_measure(self) -> Fraction:
        return sum(self.masses, Fraction(0)) + self.ledger_measure


def build_partition_P(ctx: Gs3Context, u: int, v: int, family: RFamily,
                      ledger: NullLedger) -> PairPartition:
    """Classify every pair of ``X^u x X^v``; parts are the distinct tags."""
    if u > v:
        u, v = v, u
    lmask = ledger.mask(ctx, u, v)
    nu, nv = len(ctx.labels[u]), len(ctx.labels[v])
    labels = np.full((nu, nv), -1, dtype=np.int64)
    fub = np.zeros((nu, nv), dtype=bool)
    rid = np.full((nu, nv), -1, dtype=np.int64)
    index: Dict[Tag, int] = {}
    tags: List[Tag] = []
    led = np.zeros((nu, nv), dtype=bool)
    for i in range(nu):
        for j in range(nv):
            pc = classify_pair(ctx, u, v, i, j, family, lmask)
            if pc.tag[0] == "Null":
                led[i, j] = True
                continue
            if pc.tag[0] == "R":
                rid[i, j] = pc.tag[1]
            if pc.tag not in index:
                index[pc.tag] = len(tags)
                tags.append(pc.tag)
            labels[i, j] = index[pc.tag]
            fub[i, j] = pc.fubini_null
    if ((labels >= 0) == led).any():
        raise StructuralError("coverage gap: a pair is neither in a part nor in the ledger")
    wu = [Fraction(w) for w in ctx.inst.parts[u].weights]
    wv = [Fraction(w) for w in ctx.inst.parts[v].weights]
    masses = [Fraction(0)] * len(tags)
    lm = Fraction(0)
    for i in range(nu):
        if wu[i] == 0:
            continue
        for j in range(nv):
            m = wu[i] * wv[j]
            if m:
                if labels[i, j] >= 0:
                    masses[labels[i, j]] += m
                else:
                    lm += m
    if lm != 0:
        raise ContractError(f"ledger of pair {(u + 1, v + 1)} has measure {lm}")
    out = PairPartition(u, v, labels, tags, led, fub, rid, masses, lm)
    if out.total_measure() != 1:
        raise ContractError("part masses do not add up to 1")
    return out


@dataclass
class Gs3Analysis:
    ctx: Gs3Context
    candidates: Dict[Tuple[int, int], List[Rect]]
    families: Dict[Tuple[int, int], RFamily]
    ledger: NullLedger
    partitions: Dict[Tuple[int, int], PairPartition] = field(default_factory=dict)


def analyze(inst: TernaryInstance, partitions: bool = True) -> Gs3Analysis:
    """Prefix trees, families, ledgers and (optionally) the three pair partitions."""
    ctx = Gs3Context(inst)
    cands, fams, ledger = build_ledger(ctx)
    out = Gs3Analysis(ctx, cands, fams, ledger)
    if partitions:
        out.partitions = {p: build_partition_P(ctx, *p, fams[p], ledger) for p in PAIRS}
    return out


def merge_parts(part: PairPartition, a: int, b: int) -> PairPartition:
    """Copy of ``part`` with part ``b`` folded into part ``a`` (for negative controls)."""
    if a == b:
        return part
    labels = part.labels.copy()
    labels[labels == b] = a
    masses = list(part.masses)
    masses[a] += masses[b]
    masses[b] = Fraction(0)
    return PairPartition(part.u, part.v, labels, list(part.tags), part.ledger.copy(),
                         part.fubini.copy(), part.rid.copy(), masses, part.ledger_measure)


def merge_class(part: PairPartition, kind: str) -> PairPartition:
    """Copy of ``part`` with every part of tag kind ``kind`` (e.g. ``"A"``) fused into one."""
    ids = [k for k, t in enumerate(part.tags) if t[0] == kind]
    out = part
    for k in ids[1:]:
        out = merge_parts(out, ids[0], k)
    return out
