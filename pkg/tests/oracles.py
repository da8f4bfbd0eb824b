"""Naive reference implementations, written without touching the package internals."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple


def naive_gs_edge(p, x, y, z) -> bool:
    for a, b, c in zip(x, y, z):
        s = (a + b + c) % p
        if s != 0:
            return s == 1
    return False


def parity_value(g12, g13, g23, i, j, k) -> Fraction:
    odd = (int(g12[i][j]) + int(g13[i][k]) + int(g23[j][k])) % 2
    return Fraction(1, 4) if odd else Fraction(0)


# --- ladders -----------------------------------------------------------------

def ladder_oracle(F: Sequence[Sequence[Fraction]], delta: Fraction) -> int:
    """Longest ladder by depth-first extension over all thresholds that can matter.

    A ladder with lower values ``L`` and upper values ``H`` admits
    ``alpha = (max L + min H - delta) / 2``; both are values of ``F``.
    """
    nx, ny = len(F), len(F[0])
    vals = sorted({v for row in F for v in row})
    alphas = {(a + b - delta) / 2 for a in vals for b in vals if a < b - delta}
    best = 1
    seen = set()
    for alpha in sorted(alphas):
        low = tuple(tuple(F[x][y] < alpha for y in range(ny)) for x in range(nx))
        high = tuple(tuple(F[x][y] > alpha + delta for y in range(ny)) for x in range(nx))
        if (low, high) in seen:
            continue
        seen.add((low, high))

        def grow(xs, ys):
            nonlocal best
            best = max(best, len(xs))
            cx = [x for x in range(nx) if x not in xs and all(high[x][y] for y in ys)]
            cy = [y for y in range(ny) if y not in ys and all(low[x][y] for x in xs)]
            if len(xs) + min(len(cx), len(cy)) <= best:
                return
            for x in cx:
                for y in cy:
                    grow(xs + [x], ys + [y])

        grow([], [])
    return best


def ladder_valid(F, xs, ys, alpha, delta) -> bool:
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if i < j and not F[x][y] < alpha:
                return False
            if j < i and not F[x][y] > alpha + delta:
                return False
    return len(set(xs)) == len(xs) and len(set(ys)) == len(ys)


# --- discrepancy ------------------------------------------------------------------

def disc2_brute(G) -> Fraction:
    na, nb = len(G), len(G[0])
    d = Fraction(sum(map(sum, G)), na * nb)
    worst = Fraction(0)
    for A in itertools.product((0, 1), repeat=na):
        for B in itertools.product((0, 1), repeat=nb):
            e = sum(G[i][j] for i in range(na) for j in range(nb) if A[i] and B[j])
            dev = abs(Fraction(e, na * nb) - d * Fraction(sum(A), na) * Fraction(sum(B), nb))
            worst = max(worst, dev)
    return worst


def triad_brute(E, g12, g13, g23) -> Fraction:
    nx, ny, nz = len(g12), len(g23), len(g23[0])
    tri = [(i, j, k) for i in range(nx) for j in range(ny) for k in range(nz)
           if g12[i][j] and g13[i][k] and g23[j][k]]
    if not tri:
        return Fraction(0)
    d = Fraction(sum(E[i][j][k] for i, j, k in tri), len(tri))
    dens = [Fraction(sum(map(sum, g)), len(g) * len(g[0])) for g in (g12, g13, g23)]
    scale = dens[0] * dens[1] * dens[2] * nx * ny * nz
    worst = Fraction(0)
    for X in itertools.product((0, 1), repeat=nx):
        for Y in itertools.product((0, 1), repeat=ny):
            for Z in itertools.product((0, 1), repeat=nz):
                c0 = [t for t in tri if X[t[0]] and Y[t[1]] and Z[t[2]]]
                hit = sum(E[i][j][k] for i, j, k in c0)
                worst = max(worst, abs(hit - d * len(c0)) / scale)
    return worst


def shortest_interval_brute(values, masses, budget, strict=False):
    pts = sorted(set(values))
    total = sum(masses)
    best = None
    for i, lo in enumerate(pts):
        for hi in pts[i:]:
            out = sum(m for v, m in zip(values, masses) if not lo <= v <= hi)
            ok = out < budget if strict else out <= budget
            if ok and (best is None or hi - lo < best[0][1] - best[0][0]):
                best = ((lo, hi), out)
    return best


def energy_brute(F, wa, wb, la, lb) -> Fraction:
    total = Fraction(0)
    for p in set(la):
        for q in set(lb):
            cell = [(i, j) for i in range(len(la)) for j in range(len(lb)) if la[i] == p and lb[j] == q]
            m = sum(wa[i] * wb[j] for i, j in cell)
            if m:
                avg = sum(wa[i] * wb[j] * F[i][j] for i, j in cell) / m
                total += m * avg * avg
    return total


# --- prefix trees ------------------------------------------------------------------

class Part:
    def __init__(self, labels, weights):
        self.labels = [tuple(s) for s in labels]
        self.weights = [Fraction(w) for w in weights]

    def mass(self, prefix) -> Fraction:
        k = len(prefix)
        return sum((w for s, w in zip(self.labels, self.weights) if s[:k] == tuple(prefix)), Fraction(0))

    def kids(self, prefix) -> set:
        k = len(prefix)
        return {s[k] for s in self.labels if s[:k] == tuple(prefix) and len(s) > k}

    def present(self, prefix) -> bool:
        k = len(prefix)
        return any(s[:k] == tuple(prefix) for s in self.labels)

    def ix(self, x):
        if self.weights[self.labels.index(tuple(x))] > 0:
            return math.inf
        return next(i for i in range(len(x) + 1) if self.mass(x[:i]) == 0)


def isum(s, t):
    return tuple((-(a + b)) % 3 for a, b in zip(s, t))


def naive_R_sR(parts: Sequence[Part], n: int, u: int, v: int) -> Dict[Tuple, object]:
    """``(sigma, tau) -> j0`` for R sets and ``-> "sR"`` for sR sets of the pair ``u < v``."""
    w = 3 - u - v
    Pu, Pv, Pw = parts[u], parts[v], parts[w]
    out = {}
    for ell in range(1, n + 1):
        for s in itertools.product(range(3), repeat=ell):
            if not Pu.mass(s) > 0:
                continue
            for t in itertools.product(range(3), repeat=ell):
                if not Pv.mass(t) > 0:
                    continue
                rho = isum(s[:-1], t[:-1])
                if not Pw.mass(rho) > 0:
                    continue
                k = Pw.kids(rho)
                if len(k) == 1:
                    j0 = (s[-1] + t[-1] + next(iter(k))) % 3
                    if j0:
                        out[(s, t)] = j0
                elif len(Pu.kids(s[:-1])) > 1 and len(Pv.kids(t[:-1])) > 1 and len(k) > 1:
                    out[(s, t)] = "sR"
    return out


def pair_set(parts, u, v, s, t) -> set:
    A = [x for x in parts[u].labels if x[:len(s)] == tuple(s)]
    B = [y for y in parts[v].labels if y[:len(t)] == tuple(t)]
    return {(x, y) for x in A for y in B}


# --- monotonicity and embeddings ------------------------------------------------------

def monotone_brute(E) -> bool:
    """Try every triple of linear orders against the literal definition."""
    sizes = E.shape

    def ok(u, order):
        pos = {x: r for r, x in enumerate(order)}
        for t in itertools.product(*(range(s) for s in sizes)):
            if not E[t]:
                continue
            for x2 in range(sizes[u]):
                if pos[x2] > pos[t[u]]:
                    t2 = list(t)
                    t2[u] = x2
                    if not E[tuple(t2)]:
                        return False
        return True

    return all(any(ok(u, o) for o in itertools.permutations(range(sizes[u]))) for u in range(3))


def embeddable_brute(E, n: int) -> bool:
    seqs = list(itertools.product(range(3), repeat=n))
    sizes = E.shape
    for maps in itertools.product(*(itertools.permutations(seqs, s) for s in sizes)):
        if all(naive_gs_edge(3, maps[0][i], maps[1][j], maps[2][k]) == bool(E[i, j, k])
               for i in range(sizes[0]) for j in range(sizes[1]) for k in range(sizes[2])):
            return True
    return False
