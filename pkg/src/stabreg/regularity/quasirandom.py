"""Discrepancy of bipartite graphs and of ternary relations on triads."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from ..core import CapExceeded, StructuralError, WeightedPart, to_rational
from ..generators import philox

DISC2_CAP = 12
TRIAD_CAP = 16


def _weights(n: int, w) -> Tuple[np.ndarray, int]:
    if w is None:
        return np.ones(n, dtype=object), n
    part = w if isinstance(w, WeightedPart) else WeightedPart(range(n), w)
    if len(part) != n:
        raise StructuralError("weight vector does not match the graph")
    nums, den = part.int_weights()
    return nums.astype(object), den


def _subset_matrix(n: int) -> np.ndarray:
    """Row ``m`` is the 0/1 indicator of bitmask ``m``."""
    return ((np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1).astype(object)


def disc2_exact(G, wa=None, wb=None, cap: int = DISC2_CAP) -> Fraction:
    """Least ``eps`` with ``|w(G cap A'xB') - d w(A')w(B')| <= eps w(A)w(B)`` for all subsets.

    For a fixed ``A'`` the worst ``B'`` takes either every column with a
    positive contribution or every column with a negative one, so only the
    smaller side is enumerated.
    """
    G = np.asarray(G, dtype=bool)
    if G.ndim != 2:
        raise StructuralError("bipartite graph must be a 2-d array")
    if min(G.shape) > cap:
        raise CapExceeded(f"disc2_exact capped at {cap} on the smaller side; use disc2_proxy")
    if 0 in G.shape:
        return Fraction(0)
    WA, TA = _weights(G.shape[0], wa)
    WB, TB = _weights(G.shape[1], wb)
    if G.shape[0] > G.shape[1]:
        G, WA, TA, WB, TB = G.T, WB, TB, WA, TA
    edge = int((WA[:, None] * WB[None, :] * G).sum())
    # entries scaled by (TA TB)^2
    M = WA[:, None] * WB[None, :] * (G.astype(object) * (TA * TB) - edge)
    cols = _subset_matrix(G.shape[0]).dot(M)
    pos = np.where(cols > 0, cols, 0).sum(axis=1)
    neg = np.where(cols < 0, -cols, 0).sum(axis=1)
    worst = max(int(pos.max()), int(neg.max()))
    return Fraction(worst, (TA * TB) ** 2)


def disc2_proxy(G, wa=None, wb=None) -> float:
    """Largest singular value of ``sqrt(w_a) (G - d) sqrt(w_b)``.

    Guarantee: ``disc2_exact(G) <= disc2_proxy(G)`` (constant 1), since each
    discrepancy is a bilinear form in two vectors of norm at most one.
    Floating point; for reporting only.
    """
    G = np.asarray(G, dtype=float)
    if G.size == 0:
        return 0.0
    a = np.full(G.shape[0], 1 / G.shape[0]) if wa is None else np.array([float(to_rational(x)) for x in wa])
    b = np.full(G.shape[1], 1 / G.shape[1]) if wb is None else np.array([float(to_rational(x)) for x in wb])
    d = a @ G @ b
    M = np.sqrt(a)[:, None] * (G - d) * np.sqrt(b)[None, :]
    return float(np.linalg.norm(M, 2))


@dataclass
class TriadStats:
    triangles: int
    density: Fraction
    deviation: Fraction
    witness: Optional[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]]
    passed: Optional[bool]
    mode: str


def triad_triangles(g12, g13, g23) -> np.ndarray:
    g12, g13, g23 = (np.asarray(g, dtype=bool) for g in (g12, g13, g23))
    if g12.shape[0] != g13.shape[0] or g12.shape[1] != g23.shape[0] or g13.shape[1] != g23.shape[1]:
        raise StructuralError("triad graphs do not share vertex classes")
    return g12[:, :, None] & g13[:, None, :] & g23[None, :, :]


def verify_disc23_triad(E, triad, eps1, mode: str = "exact", seed: int = 0,
                        samples: int = 2000, cap: int = TRIAD_CAP) -> TriadStats:
    """Worst subtriad deviation of ``E`` on the triangles of ``triad``.

    Deviation of a subtriad ``C_0`` (triangles inside ``X' x Y' x Z'``) is
    ``||E cap C_0| - d |C_0|| / (d12 d13 d23 |X||Y||Z|)`` where ``d`` is the
    density of ``E`` on all triangles.  Exact mode enumerates ``X'`` and
    ``Y'``; the worst ``Z'`` collects all positive or all negative terms.
    """
    eps1 = to_rational(eps1)
    T = triad_triangles(*triad)
    E = np.asarray(E, dtype=bool)
    if E.shape != T.shape:
        raise StructuralError("relation and triad live on different grounds")
    nx, ny, nz = T.shape
    tri = int(T.sum())
    if tri == 0:
        return TriadStats(0, Fraction(0), Fraction(0), None, True, mode)
    hit = int((E & T).sum())
    d = Fraction(hit, tri)
    g12, g13, g23 = (np.asarray(g, dtype=bool) for g in triad)
    # d12 d13 d23 |X||Y||Z| = |G12||G13||G23| / (|X||Y||Z|)
    scale = Fraction(int(g12.sum()) * int(g13.sum()) * int(g23.sum()), nx * ny * nz)
    # integer contributions scaled by tri: tri*E - hit on triangles
    C = np.where(T, np.where(E, tri - hit, -hit), 0).astype(np.int64)
    best, witness = 0, None
    if mode == "exact":
        if nx + ny > cap:
            raise CapExceeded(f"exact triad scan capped at |X|+|Y| <= {cap}")
        SX = _subset_matrix(nx).astype(np.int64)
        SY = _subset_matrix(ny).astype(np.int64)
        for my in range(1 << ny):
            sel = SY[my].astype(bool)
            colz = SX @ C[:, sel, :].sum(axis=1)  # (2^nx, nz)
            pos = np.where(colz > 0, colz, 0).sum(axis=1)
            neg = np.where(colz < 0, -colz, 0).sum(axis=1)
            for arr, sign in ((pos, 1), (neg, -1)):
                mx = int(arr.argmax())
                if arr[mx] > best:
                    best = int(arr[mx])
                    zs = np.flatnonzero(sign * colz[mx] > 0)
                    witness = (tuple(np.flatnonzero(SX[mx]).tolist()),
                               tuple(np.flatnonzero(sel).tolist()), tuple(zs.tolist()))
        dev = Fraction(best, tri) / scale
        return TriadStats(tri, d, dev, witness, dev <= eps1, mode)
    if mode != "sampled":
        raise StructuralError(f"unknown mode {mode!r}")
    rng = philox(seed)
    for _ in range(samples):
        mx, my, mz = (rng.random(n) < 0.5 for n in (nx, ny, nz))
        val = abs(int(C[np.ix_(mx, my, mz)].sum()))
        if val > best:
            best = val
            witness = tuple(tuple(np.flatnonzero(m).tolist()) for m in (mx, my, mz))
    dev = Fraction(best, tri) / scale
    return TriadStats(tri, d, dev, witness, None, mode)
