"""Energy-increment refinement of a pair of vertex partitions.

The energy of partitions ``(P, Q)`` of ``A`` and ``B`` for ``f: A x B -> [0,1]``
is ``sum mu(p x q) * avg_{p x q}(f)^2``.  Refining never lowers it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from ..core import PartiteFunction, StructuralError, to_rational
from .quasirandom import DISC2_CAP, _subset_matrix


def _relabel(labels: np.ndarray) -> np.ndarray:
    _, inv = np.unique(labels, return_inverse=True)
    return inv.reshape(labels.shape).astype(np.int64)


def energy(f: PartiteFunction, la: np.ndarray, lb: np.ndarray) -> Fraction:
    """Exact energy of the rectangle partition given by label arrays."""
    wa, da = f.parts[0].int_weights()
    wb, db = f.parts[1].int_weights()
    W = np.multiply.outer(wa.astype(object), wb.astype(object))
    nq = int(lb.max()) + 1 if lb.size else 1
    keys = (np.asarray(la)[:, None] * nq + np.asarray(lb)[None, :]).ravel()
    K = int(keys.max()) + 1 if keys.size else 0
    mass = np.zeros(K, dtype=object)
    tot = np.zeros(K, dtype=object)
    np.add.at(mass, keys, W.ravel())
    np.add.at(tot, keys, (W * f.numer.astype(object)).ravel())
    # sum (tot/den)^2 / mass with tot over da*db*f.denom and mass over da*db
    out = Fraction(0)
    for m, t in zip(mass.tolist(), tot.tolist()):
        if m:
            out += Fraction(t * t, m)
    return out / (da * db * f.denom ** 2)


def _block_witness(D: np.ndarray, wa: np.ndarray, wb: np.ndarray, exact: bool):
    """Subsets (bool masks) maximising |sum_{A'xB'} w_a w_b D|, exactly or greedily.

    ``D`` holds integer deviations from the block mean.
    """
    M = wa[:, None] * wb[None, :] * D
    na, nb = M.shape
    if exact and min(na, nb) <= DISC2_CAP:
        flip = na > nb
        if flip:
            M = M.T
        S = _subset_matrix(M.shape[0])
        cols = S.dot(M.astype(object))
        pos = np.where(cols > 0, cols, 0).sum(axis=1)
        neg = np.where(cols < 0, -cols, 0).sum(axis=1)
        if pos.max() >= neg.max():
            r = int(pos.argmax())
            ma, mb = S[r].astype(bool), cols[r] > 0
            val = int(pos[r])
        else:
            r = int(neg.argmax())
            ma, mb = S[r].astype(bool), cols[r] < 0
            val = int(neg[r])
        return (mb, ma, val) if flip else (ma, mb, val)
    # alternating sign heuristic from both starting signs
    best = (np.zeros(na, bool), np.zeros(nb, bool), 0)
    for sign in (1, -1):
        ma = sign * M.sum(axis=1) > 0
        for _ in range(8):
            mb = sign * M[ma].sum(axis=0) > 0
            ma = sign * M[:, mb].sum(axis=1) > 0
        val = abs(int(M[np.ix_(ma, mb)].sum())) if ma.any() and mb.any() else 0
        if val > best[2]:
            best = (ma, mb, val)
    return best


@dataclass
class RefinementRun:
    partitions: List[Tuple[np.ndarray, np.ndarray]]
    energies: List[Fraction]
    deviations: List[Fraction] = field(default_factory=list)
    converged: bool = False

    @property
    def final(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.partitions[-1]


def block_deviation(f: PartiteFunction, la, lb, p: int, q: int, exact: bool = True):
    """Worst subset discrepancy of ``f`` inside block ``p x q``, relative to the whole ground."""
    ia, ib = np.flatnonzero(la == p), np.flatnonzero(lb == q)
    wa, da = f.parts[0].int_weights()
    wb, db = f.parts[1].int_weights()
    wa, wb = wa.astype(object)[ia], wb.astype(object)[ib]
    F = f.numer[np.ix_(ia, ib)].astype(object)
    mass = int(wa.sum()) * int(wb.sum())
    if mass == 0:
        return np.zeros(len(ia), bool), np.zeros(len(ib), bool), Fraction(0), ia, ib
    tot = int((wa[:, None] * wb[None, :] * F).sum())
    D = F * mass - tot  # scaled by mass
    ma, mb, val = _block_witness(D, wa, wb, exact)
    return ma, mb, Fraction(val, mass * da * db * f.denom), ia, ib


def energy_refine(f: PartiteFunction, init: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                  steps: int = 10, tol=0, exact: bool = True) -> RefinementRun:
    """Split one part pair per step along its worst discrepancy witness.

    Stops early at a fixpoint: every block has deviation ``<= tol``.
    """
    if f.k != 2:
        raise StructuralError("energy refinement works on binary functions")
    tol = to_rational(tol)
    la, lb = (np.zeros(f.shape[0], np.int64), np.zeros(f.shape[1], np.int64)) if init is None \
        else (_relabel(np.asarray(init[0])), _relabel(np.asarray(init[1])))
    run = RefinementRun([(la, lb)], [energy(f, la, lb)])
    for _ in range(steps):
        worst = None
        for p in range(int(la.max()) + 1 if la.size else 0):
            for q in range(int(lb.max()) + 1 if lb.size else 0):
                ma, mb, dev, ia, ib = block_deviation(f, la, lb, p, q, exact)
                if worst is None or dev > worst[0]:
                    worst = (dev, p, q, ma, mb, ia, ib)
        if worst is None or worst[0] <= tol:
            run.converged = True
            break
        dev, p, q, ma, mb, ia, ib = worst
        la, lb = la.copy(), lb.copy()
        if ma.any() and not ma.all():
            la[ia[ma]] = la.max() + 1
        if mb.any() and not mb.all():
            lb[ib[mb]] = lb.max() + 1
        la, lb = _relabel(la), _relabel(lb)
        run.partitions.append((la, lb))
        run.energies.append(energy(f, la, lb))
        run.deviations.append(dev)
    return run
