"""Partition constructor for average systems.

Each ``P^e`` is viewed as a bipartite relation between the e-tuples ``U_e``
and ``omega``.  Both sides get partitioned, the omega partitions are
commonly refined, and every e-tuple part becomes a *side* ``S_{e,j}``.
Sides on which most faces (side x omega-piece) are far from quasi-random are
collected into the exceptional side ``S_{e,0}``.

Two strategies produce the bipartite partitions:

* ``profile``: e-tuples are grouped by their exact family subset and omega is
  cut into points, so ``f`` is constant on every cell and ``S_{e,0}`` is empty;
* ``energy``: energy-increment refinement with a step budget.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from ..core import (BudgetFn, GradedPartition, ParameterError, PartiteFunction, WeightedPart,
                    product_weights, to_rational)
from ..generators import AverageSystem
from .energy import block_deviation, energy_refine

SCOPE = {(2, 1), (3, 1), (3, 2), (4, 2), (4, 3)}


@dataclass
class ConstructionResult:
    partition: GradedPartition
    omega_pieces: np.ndarray
    strategy: str
    partial: bool = False
    face_deviation: Dict[Tuple, Fraction] = field(default_factory=dict)
    system: AverageSystem = field(default=None, repr=False)
    _pred: Tuple = field(default=None, init=False, repr=False)

    def _ensure(self):
        if self._pred is None:
            self._pred = _predictions(self.system, self.partition, self.omega_pieces)
        return self._pred

    @property
    def predicted(self) -> Dict[Tuple[int, ...], Fraction]:
        """Per base (positive-measure cell): ``sum_i mu(W_i) prod_e gamma_{e, j_e, i}``."""
        return self._ensure()[0]

    @property
    def actual(self) -> Dict[Tuple[int, ...], Fraction]:
        return self._ensure()[1]

    @property
    def deviation(self) -> Dict[Tuple[int, ...], Fraction]:
        return {k: abs(self.predicted[k] - self.actual[k]) for k in self.predicted}


def _membership(system: AverageSystem, e) -> Tuple[PartiteFunction, Tuple[int, ...]]:
    """``P^e`` as a 0/1 function on ``U_e x omega``; rows in C order of the e-tuples."""
    masks = system.masks(e)
    shape = masks.shape
    tuples = list(itertools.product(*(range(s) for s in shape)))
    bits = (masks.reshape(-1)[:, None] >> np.arange(len(system.omega))[None, :]) & 1
    W, den = product_weights([system.parts[i] for i in e])
    U = WeightedPart(tuples, [Fraction(int(w), den) for w in W.ravel().tolist()])
    return PartiteFunction((U, system.omega), bits.astype(np.int64), 1), shape


def _profile_sides(system: AverageSystem, e) -> np.ndarray:
    flat = system.masks(e).ravel()
    _, first, inv = np.unique(flat, return_index=True, return_inverse=True)
    # number parts by first appearance, starting at 1
    rank = np.argsort(np.argsort(first))
    return rank[inv] + 1


def build_regular_partition_avg(system: AverageSystem, epsilon, budget: BudgetFn,
                                strategy: str = "profile", steps: int = 8,
                                qr_tol=None) -> ConstructionResult:
    """Return sides as parts, plus per-base predicted values ``sum_i mu(W_i) prod_e gamma``.

    The constructor guarantees the structural shape only; feed the result to
    ``verify_strong_regularity`` for the verdict.
    """
    if (system.k, system.d) not in SCOPE:
        raise ParameterError(f"constructor supports (k,d) in {sorted(SCOPE)}")
    eps = to_rational(epsilon)
    qr_tol = eps if qr_tol is None else to_rational(qr_tol)
    m = len(system.omega)
    members = {e: _membership(system, e) for e in system.edges}
    partial = False
    face_dev: Dict[Tuple[int, ...], Fraction] = {}
    if strategy == "profile":
        sides = {e: _profile_sides(system, e) for e in system.edges}
        pieces = np.arange(m)
    elif strategy == "energy":
        raw_sides, omega_labels = {}, []
        for e in system.edges:
            f_e, _ = members[e]
            run = energy_refine(f_e, steps=steps, tol=qr_tol ** 2, exact=min(f_e.shape) <= 8)
            partial |= not run.converged
            raw_sides[e], lo = run.final
            omega_labels.append(lo)
        _, pieces = np.unique(np.stack(omega_labels, axis=1), axis=0, return_inverse=True)
        pieces = pieces.ravel()
        sides = {}
        for e in system.edges:
            f_e, _ = members[e]
            la = raw_sides[e]
            wU = f_e.parts[0].weights
            bad = set()
            for p in range(int(la.max()) + 1):
                side_mass = sum((wU[i] for i in np.flatnonzero(la == p)), Fraction(0))
                bad_mass = Fraction(0)
                for q in range(int(pieces.max()) + 1):
                    _, _, dev, ia, ib = block_deviation(f_e, la, pieces, p, q, exact=False)
                    face = side_mass * sum((system.omega.weights[z] for z in ib), Fraction(0))
                    rel = dev / face if face else Fraction(0)
                    face_dev[(e, p, q)] = rel
                    if rel > qr_tol:
                        bad_mass += face
                if side_mass and bad_mass * 2 >= side_mass:
                    bad.add(p)
            good = [p for p in range(int(la.max()) + 1) if p not in bad]
            relabel = {p: (good.index(p) + 1 if p in good else 0) for p in range(int(la.max()) + 1)}
            sides[e] = np.array([relabel[int(p)] for p in la], dtype=np.int64)
    else:
        raise ParameterError(f"unknown strategy {strategy!r}")

    sizes = tuple(len(p) for p in system.parts)
    labels = {e: sides[e].reshape(members[e][1]) for e in system.edges}
    partition = GradedPartition(system.k, system.d, sizes, labels)
    return ConstructionResult(partition, pieces, strategy, partial, face_dev, system)


def _predictions(system: AverageSystem, partition: GradedPartition, pieces: np.ndarray):
    """Predicted ``sum_i mu(W_i) prod_e gamma_{e, j_e, i}`` and actual averages per base."""
    wom = system.omega.weights
    npieces = int(pieces.max()) + 1 if len(pieces) else 0
    piece_mass = [sum((wom[z] for z in np.flatnonzero(pieces == i)), Fraction(0)) for i in range(npieces)]
    gamma = {}
    for e in system.edges:
        f_e, _ = _membership(system, e)
        wU = f_e.parts[0].weights
        lab = partition.labels[e].ravel()
        # hit[r, i] = mu(P^e_r cap W_i)
        hit = [[sum((wom[z] for z in np.flatnonzero((pieces == i) & (f_e.numer[r] == 1))), Fraction(0))
                for i in range(npieces)] for r in range(len(wU))]
        for j in range(1, partition.b(e) + 1):
            rows = np.flatnonzero(lab == j)
            smass = sum((wU[r] for r in rows), Fraction(0))
            for i in range(npieces):
                den = smass * piece_mass[i]
                num = sum((wU[r] * hit[r][i] for r in rows), Fraction(0))
                gamma[(e, j, i)] = num / den if den else Fraction(0)
    f = system.to_function()
    W, wden = product_weights(system.parts)
    ids, keys = partition.cell_ids()
    flat = ids.ravel()
    order = np.argsort(flat, kind="stable")
    bounds = np.searchsorted(flat[order], np.arange(len(keys) + 1))
    Wf = W.ravel().astype(object)
    Ff = f.numer.ravel().astype(object)
    predicted, actual = {}, {}
    for cid, key in enumerate(keys):
        if 0 in key:
            continue
        sel = order[bounds[cid]:bounds[cid + 1]]
        mass = int(Wf[sel].sum())
        if not mass:
            continue
        actual[key] = Fraction(int((Wf[sel] * Ff[sel]).sum()), mass * f.denom)
        predicted[key] = sum((piece_mass[i] * math.prod((gamma[(e, j, i)] for e, j in zip(partition.edges, key)),
                                                        start=Fraction(1))
                              for i in range(npieces)), Fraction(0))
    return predicted, actual
