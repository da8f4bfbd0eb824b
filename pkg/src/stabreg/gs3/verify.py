"""Homogeneity of cylinder intersections of the three pair partitions."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core import ParameterError, product_weights
from .partition import PairPartition
from .tree import Gs3Context

Triple = Tuple[int, int, int]


@dataclass
class TripleCell:
    parts: Tuple[int, int, int]  # part ids in 𝒫^{1,2}, 𝒫^{1,3}, 𝒫^{2,3}
    measure: Fraction
    size: int
    kept: int
    side: Optional[int]  # 1 for E, 2 for its complement, None if mixed or all deleted
    witness: Optional[Tuple[Triple, Triple]] = None


@dataclass
class TripleReport:
    cells: List[TripleCell]
    scope: str
    two_R_failures: List[Tuple[Triple, Triple]] = field(default_factory=list)
    R_disjoint_failures: List[Tuple[Triple, Triple]] = field(default_factory=list)

    @property
    def failures(self) -> List[TripleCell]:
        return [c for c in self.cells if c.witness is not None]

    @property
    def positive_failures(self) -> List[TripleCell]:
        return [c for c in self.failures if c.measure > 0]

    @property
    def passed(self) -> bool:
        return not self.failures and not self.two_R_failures and not self.R_disjoint_failures


def _group_minmax(codes: np.ndarray, E: np.ndarray):
    """Per distinct code: first index with E false and first with E true (or -1)."""
    uniq, inv = np.unique(codes, return_inverse=True)
    out0 = np.full(len(uniq), -1, dtype=np.int64)
    out1 = np.full(len(uniq), -1, dtype=np.int64)
    idx = np.arange(len(codes))
    for val, out in ((False, out0), (True, out1)):
        sel = E == val
        g, pos = inv[sel], idx[sel]
        # reverse so the earliest index wins the assignment
        out[g[::-1]] = pos[::-1]
    return uniq, inv, out0, out1


def _failures(codes, E, flat_index, shape):
    """Groups containing both an edge and a non-edge, as witness pairs."""
    uniq, _, f0, f1 = _group_minmax(codes, E)
    bad = []
    for k in np.flatnonzero((f0 >= 0) & (f1 >= 0)):
        a = np.unravel_index(flat_index[f0[k]], shape)
        b = np.unravel_index(flat_index[f1[k]], shape)
        bad.append((tuple(int(t) for t in a), tuple(int(t) for t in b)))
    return bad


def verify_triple_homogeneity(ctx: Gs3Context, partitions: Dict[Tuple[int, int], PairPartition],
                              scope: str = "positive") -> TripleReport:
    """After deleting ledger triples, every cell must be entirely inside or outside E.

    ``scope="positive"`` checks the cells of positive measure; ``"all"`` checks
    every nonempty cell.  Also checks every intersection of two family members
    with no deletion, and every family member against pairs outside ℛ (ledger
    deleted); under ``"positive"`` those two sub-checks compare weighted triples
    only.
    """
    if scope not in ("positive", "all"):
        raise ParameterError("scope must be 'positive' or 'all'")
    P01, P02, P12 = partitions[(0, 1)], partitions[(0, 2)], partitions[(1, 2)]
    E = np.asarray(ctx.edges, dtype=bool)
    shape = E.shape
    L01 = P01.labels[:, :, None]
    L02 = P02.labels[:, None, :]
    L12 = P12.labels[None, :, :]
    led = (P01.verification_ledger()[:, :, None] | P02.verification_ledger()[:, None, :]
           | P12.verification_ledger()[None, :, :])
    n02, n12 = len(P02.tags) + 1, len(P12.tags) + 1
    codes = ((L01 + 1) * n02 + (L02 + 1)) * n12 + (L12 + 1)
    codes = np.broadcast_to(codes, shape).ravel()
    W, wden = product_weights(ctx.inst.parts)
    Wf = W.ravel()
    Ef = E.ravel()
    keep = ~np.broadcast_to(led, shape).ravel()

    order = np.argsort(codes, kind="stable")
    sc = codes[order]
    cuts = np.flatnonzero(np.diff(sc)) + 1
    starts = np.concatenate([[0], cuts])
    ends = np.concatenate([cuts, [len(sc)]])
    cells = []
    for s, e in zip(starts.tolist(), ends.tolist()):
        members = order[s:e]
        code = int(sc[s])
        c12 = code % n12 - 1
        c02 = (code // n12) % n02 - 1
        c01 = code // (n12 * n02) - 1
        if -1 in (c01, c02, c12):
            continue  # a coordinate pair sits in the ledger: nothing to test
        mass = Fraction(int(sum(Wf[members].tolist())), wden)
        if scope == "positive" and mass == 0:
            continue
        km = members[keep[members]]
        ev = Ef[km]
        side = None
        witness = None
        if len(km):
            if ev.all():
                side = 1
            elif not ev.any():
                side = 2
            else:
                a = km[int(np.argmin(ev))]
                b = km[int(np.argmax(ev))]
                witness = tuple(tuple(int(t) for t in np.unravel_index(i, shape)) for i in (a, b))
        cells.append(TripleCell((c01, c02, c12), mass, len(members), len(km), side, witness))

    # two family members, third coordinate free
    R = [np.broadcast_to(P01.rid[:, :, None], shape).ravel(),
         np.broadcast_to(P02.rid[:, None, :], shape).ravel(),
         np.broadcast_to(P12.rid[None, :, :], shape).ravel()]
    flat_idx = np.arange(E.size)
    # 0-homogeneity of these sets is a statement about mass: under "positive"
    # only weighted triples are compared, under "all" every triple is
    heavy = (Wf != 0) if scope == "positive" else np.ones(E.size, dtype=bool)
    two = []
    for a, b in ((0, 1), (0, 2), (1, 2)):
        sel = (R[a] >= 0) & (R[b] >= 0)
        if sel.any():
            m = max(int(R[b].max()) + 1, 1)
            sel &= heavy
            two += _failures(R[a][sel] * m + R[b][sel], Ef[sel], flat_idx[sel], shape)
    # one family member, both other pairs outside ℛ, ledger deleted
    disj = []
    for a in range(3):
        others = [R[b] for b in range(3) if b != a]
        sel = (R[a] >= 0) & (others[0] < 0) & (others[1] < 0) & keep & heavy
        if sel.any():
            disj += _failures(R[a][sel], Ef[sel], flat_idx[sel], shape)
    return TripleReport(cells, scope, two, disj)


def corrupting_merge(report: TripleReport, keep: int = 2) -> Optional[Dict[int, Tuple[int, int]]]:
    """Part merges that mix E on a checked cell (a negative control).

    Picks two homogeneous cells with opposite sides sharing their part in slot
    ``keep`` (0, 1, 2 for 𝒫^{1,2}, 𝒫^{1,3}, 𝒫^{2,3}).  Merging their parts in
    the other slots puts both cells inside one, which therefore holds an edge
    and a non-edge.  Returns ``{slot: (part, part)}`` or None.
    """
    seen: Dict[int, TripleCell] = {}
    for c in report.cells:
        if c.side is None:
            continue
        k = c.parts[keep]
        if k in seen and seen[k].side != c.side:
            return {s: (seen[k].parts[s], c.parts[s]) for s in range(3)
                    if s != keep and seen[k].parts[s] != c.parts[s]}
        seen.setdefault(k, c)
    return None
