"""Exact verifiers for strong and perfect stable regularity and for the
small-cell lower bounds.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core import (BudgetFn, ContractError, ParameterError, PartiteFunction, StructuralError,
                    GradedPartition, product_weights, shortest_covering_interval, to_rational)


@dataclass
class CellVerdict:
    indices: Tuple[int, ...]
    measure: Fraction
    size: int
    interval: Optional[Tuple[Fraction, Fraction]]
    exceptional: Fraction
    budget: Fraction
    verdict: str  # "pass", "fail" or "null"
    witness: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None

    @property
    def length(self) -> Optional[Fraction]:
        return None if self.interval is None else self.interval[1] - self.interval[0]


@dataclass
class HomogeneityReport:
    cells: List[CellVerdict]
    exceptional_sides: Dict[Tuple[int, ...], Fraction]
    b: Dict[Tuple[int, ...], int]
    epsilon: Fraction
    budget: Optional[BudgetFn]
    side_failures: List[Tuple[int, ...]] = field(default_factory=list)

    @property
    def failures(self) -> List[CellVerdict]:
        return [c for c in self.cells if c.verdict == "fail"]

    @property
    def passed(self) -> bool:
        return not self.failures and not self.side_failures

    @property
    def max_exceptional(self) -> Fraction:
        return max((c.exceptional for c in self.cells), default=Fraction(0))


def _check_grounds(f: PartiteFunction, partition: GradedPartition) -> None:
    if f.k != partition.k or tuple(f.shape) != tuple(partition.sizes):
        raise StructuralError("function and partition live on different grounds")


def _grouped_cells(f: PartiteFunction, partition: GradedPartition):
    """Yield (key, flat tuple indices, integer masses, mass denominator) per nonempty cell."""
    ids, keys = partition.cell_ids()
    W, wden = product_weights(f.parts)
    flat_ids = ids.ravel()
    order = np.argsort(flat_ids, kind="stable")
    bounds = np.searchsorted(flat_ids[order], np.arange(len(keys) + 1))
    Wf = W.ravel()
    for cid, key in enumerate(keys):
        members = order[bounds[cid]:bounds[cid + 1]]
        yield key, members, Wf[members], wden


def side_measures(f: PartiteFunction, partition: GradedPartition, e) -> List[Fraction]:
    """Measure of every part ``S_{e,j}`` under the product of the coordinate weights."""
    ws = [f.parts[i].int_weights() for i in e]
    W = np.ones((), dtype=object)
    for nums, _ in ws:
        W = np.multiply.outer(W, nums.astype(object))
    den = math.prod(d for _, d in ws)
    lab = partition.labels[e]
    out = [Fraction(0)] * (partition.b(e) + 1)
    sums = {}
    for j, w in zip(lab.ravel().tolist(), W.ravel().tolist()):
        sums[j] = sums.get(j, 0) + w
    for j, s in sums.items():
        out[j] = Fraction(s, den)
    return out


def verify_strong_regularity(f: PartiteFunction, partition: GradedPartition, epsilon,
                             budget: BudgetFn) -> HomogeneityReport:
    """Check homogeneity on every nonempty cell with all indices positive.

    Each cell gets the shortest interval leaving mass strictly below
    ``F(max_e b_e) mu(C)`` outside; it passes iff that interval is shorter than
    ``epsilon``.  Cells of measure 0 carry no mass to test and get verdict
    ``null``.  Each exceptional side must have measure below ``epsilon``.
    """
    _check_grounds(f, partition)
    eps = to_rational(epsilon)
    if eps <= 0:
        raise ParameterError("epsilon must be positive")
    bmax = max(partition.max_b(), 1)
    Fb = budget(bmax)
    flat_vals = f.numer.ravel()
    ids, keys = partition.cell_ids()
    W, wden = product_weights(f.parts)
    order = np.argsort(ids.ravel(), kind="stable")
    starts = np.searchsorted(ids.ravel()[order], np.arange(len(keys)))
    # per-cell reductions in one pass; cells are never empty
    Wf = W.ravel()[order]
    Vf = flat_vals[order]
    mass_all = np.add.reduceat(Wf, starts) if len(keys) else Wf[:0]
    vmin = np.minimum.reduceat(Vf, starts) if len(keys) else Vf[:0]
    vmax = np.maximum.reduceat(Vf, starts) if len(keys) else Vf[:0]
    ends = np.append(starts[1:], len(order))
    zero = Fraction(0)
    measures: Dict[int, Tuple[Fraction, Fraction]] = {}
    points: Dict[int, Fraction] = {}
    cells = []
    for cid, key in enumerate(keys):
        if 0 in key:
            continue
        size = int(ends[cid] - starts[cid])
        mass_int = int(mass_all[cid])
        if mass_int not in measures:
            m = Fraction(mass_int, wden)
            measures[mass_int] = (m, Fb * m)
        measure, allowed = measures[mass_int]
        if mass_int == 0:
            cells.append(CellVerdict(key, measure, size, None, zero, zero, "null"))
            continue
        if vmin[cid] == vmax[cid]:
            iv = int(vmin[cid])
            if iv not in points:
                points[iv] = Fraction(iv, f.denom)
            v = points[iv]
            cells.append(CellVerdict(key, measure, size, (v, v), zero, allowed, "pass"))
            continue
        members = order[starts[cid]:ends[cid]]
        masses = Wf[starts[cid]:ends[cid]]
        vals = flat_vals[members]
        uniq, inv = np.unique(vals, return_inverse=True)
        agg = [0] * len(uniq)
        for i, m in zip(inv.tolist(), masses.tolist()):
            agg[i] += m
        values = [Fraction(int(v), f.denom) for v in uniq.tolist()]
        res = shortest_covering_interval(values, [Fraction(m, wden) for m in agg],
                                         allowed, strict=True)
        (lo, hi), exc = res
        ok = hi - lo < eps
        witness = None
        if not ok:
            # two covered tuples at the ends of the best window
            lo_i = members[int(np.flatnonzero(vals == uniq[values.index(lo)])[0])]
            hi_i = members[int(np.flatnonzero(vals == uniq[values.index(hi)])[0])]
            witness = (np.unravel_index(lo_i, f.shape), np.unravel_index(hi_i, f.shape))
            witness = tuple(tuple(int(v) for v in w) for w in witness)
        cells.append(CellVerdict(key, measure, size, (lo, hi), exc, allowed,
                                 "pass" if ok else "fail", witness))
    sides = {}
    bad = []
    for e in partition.edges:
        sides[e] = side_measures(f, partition, e)[0]
        if not sides[e] < eps:
            bad.append(e)
    return HomogeneityReport(cells, sides, {e: partition.b(e) for e in partition.edges},
                             eps, budget, bad)


@dataclass
class PerfectReport:
    cells: List[Tuple[Tuple[int, ...], Optional[Tuple[Fraction, Fraction]], str]]
    witnesses: List[Tuple[Tuple[int, ...], Tuple[int, ...]]]
    ledger_size: int

    @property
    def passed(self) -> bool:
        return not self.witnesses


def verify_perfect_regularity(f: PartiteFunction, partition: GradedPartition,
                              null_ledger: Iterable[Sequence[int]], epsilon=0,
                              indicator: Optional[bool] = None) -> PerfectReport:
    """Off the ledger, ``f`` must lie in an interval of length ``<= epsilon`` on every cell.

    ``null_ledger`` lists index tuples; each must have weight 0.  For 0/1
    indicators (detected automatically unless ``indicator`` is given) every
    cell must be constant off the ledger.  Cells of measure 0 are themselves
    null and pass.
    """
    _check_grounds(f, partition)
    eps = to_rational(epsilon)
    ledger = np.zeros(f.shape, dtype=bool)
    W, _ = product_weights(f.parts)
    for t in null_ledger:
        t = tuple(int(v) for v in t)
        if W[t] != 0:
            raise ContractError(f"ledger tuple {t} has positive measure")
        ledger[t] = True
    if indicator is None:
        indicator = f.is_indicator()
    if indicator:
        eps = Fraction(0)
    flat_vals = f.numer.ravel()
    flat_ledger = ledger.ravel()
    cells, witnesses = [], []
    for key, members, masses, _ in _grouped_cells(f, partition):
        if not any(masses.tolist()):
            cells.append((key, None, "null"))
            continue
        keep = members[~flat_ledger[members]]
        vals = flat_vals[keep]
        lo_i, hi_i = keep[int(vals.argmin())], keep[int(vals.argmax())]
        lo, hi = Fraction(int(flat_vals[lo_i]), f.denom), Fraction(int(flat_vals[hi_i]), f.denom)
        if hi - lo <= eps:
            cells.append((key, (lo, hi), "pass"))
        else:
            cells.append((key, (lo, hi), "fail"))
            witnesses.append(tuple(tuple(int(v) for v in np.unravel_index(i, f.shape))
                                   for i in (lo_i, hi_i)))
    return PerfectReport(cells, witnesses, int(ledger.sum()))


@dataclass
class LowerBoundReport:
    bound: Fraction
    cell_violations: List[Tuple[Tuple[int, ...], Fraction, Fraction]]
    side_violations: List[Tuple[Tuple[int, ...], int, Fraction]]

    @property
    def passed(self) -> bool:
        return not self.cell_violations and not self.side_violations


def verify_cell_lower_bounds(f_or_parts, partition: GradedPartition, budget: BudgetFn,
                             cap: int = 10**6) -> LowerBoundReport:
    """``mu(C) >= F(b) prod_e mu(S_{e,i_e})`` and ``mu(S_{e,i}) >= F(b)`` for all positive indices.

    Every index combination is checked, including empty cells.  The first
    argument is a function on the ground or its list of weighted parts.
    """
    parts = f_or_parts.parts if isinstance(f_or_parts, PartiteFunction) else tuple(f_or_parts)
    dummy = PartiteFunction(parts, np.zeros(partition.sizes, np.int64), 1)
    _check_grounds(dummy, partition)
    b = max(partition.max_b(), 1)
    Fb = budget(b)
    sides = {e: side_measures(dummy, partition, e) for e in partition.edges}
    side_viol = [(e, j, m) for e in partition.edges for j, m in enumerate(sides[e])
                 if j > 0 and m < Fb]
    cell_mass = {}
    for key, members, masses, wden in _grouped_cells(dummy, partition):
        cell_mass[key] = Fraction(int(sum(masses.tolist())), wden)
    ranges = [range(1, partition.b(e) + 1) for e in partition.edges]
    if math.prod(len(r) for r in ranges) > cap:
        raise ParameterError("too many index combinations to enumerate")
    cell_viol = []
    for key in itertools.product(*ranges):
        need = Fb * math.prod((sides[e][j] for e, j in zip(partition.edges, key)), start=Fraction(1))
        got = cell_mass.get(key, Fraction(0))
        if got < need:
            cell_viol.append((key, got, need))
    return LowerBoundReport(Fb, cell_viol, side_viol)
