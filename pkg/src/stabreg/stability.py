"""Order-property (ladder) search for binary [0,1]-valued functions.

A ladder of length l is a pair of sequences of distinct elements
``x_1..x_l``, ``y_1..y_l`` and a threshold ``alpha`` with
``f(x_i, y_j) < alpha`` for ``i < j`` and ``f(x_i, y_j) > alpha + delta``
for ``j < i``.  The diagonal is unconstrained.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import CapExceeded, ParameterError, PartiteFunction, StructuralError, to_rational
from .generators import philox

EXACT_CAP = 10


@dataclass(frozen=True)
class LadderWitness:
    xs: Tuple[int, ...]
    ys: Tuple[int, ...]
    alpha: Fraction
    delta: Fraction

    def __len__(self) -> int:
        return len(self.xs)


def _check_binary(f: PartiteFunction) -> None:
    if f.k != 2:
        raise StructuralError("ladders are defined for binary functions")


def validate_ladder(f: PartiteFunction, w: LadderWitness) -> bool:
    """Literal check of both ladder clauses, plus distinctness and alpha in [0,1]."""
    _check_binary(f)
    if len(w.xs) != len(w.ys) or len(w.xs) == 0:
        return False
    if len(set(w.xs)) != len(w.xs) or len(set(w.ys)) != len(w.ys):
        return False
    if not 0 <= w.alpha <= 1:
        return False
    for i, x in enumerate(w.xs):
        for j, y in enumerate(w.ys):
            v = f.value((x, y))
            if i < j and not v < w.alpha:
                return False
            if j < i and not v > w.alpha + w.delta:
                return False
    return True


def _alpha_for(f: PartiteFunction, xs, ys, delta: Fraction) -> Optional[Fraction]:
    """Midpoint threshold for a candidate ladder, or None if no alpha fits."""
    lows = [f.value((x, y)) for i, x in enumerate(xs) for j, y in enumerate(ys) if i < j]
    highs = [f.value((x, y)) for i, x in enumerate(xs) for j, y in enumerate(ys) if j < i]
    if not lows:
        return Fraction(0)
    lo, hi = max(lows), min(highs) - delta
    if not lo < hi:
        return None
    return (lo + hi) / 2


def _threshold_masks(f: PartiteFunction, v: Fraction, delta: Fraction):
    """Bitmasks: ``low[x]`` = {y : f <= v}, ``high_col[y]`` = {x : f > v + delta}."""
    vals = f.fractions()
    nx, ny = f.shape
    low = [sum(1 << y for y in range(ny) if vals[x, y] <= v) for x in range(nx)]
    high_col = [sum(1 << x for x in range(nx) if vals[x, y] > v + delta) for y in range(ny)]
    return low, high_col


def _bits(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _longest(low, high_col, nx: int, ny: int, floor: int):
    """Longest ladder for fixed low/high relations; DFS with a counting bound."""
    best: List[Tuple[Tuple[int, ...], Tuple[int, ...]]] = [((), ())]
    best_len = [floor]

    def dfs(xs, ys, xc, yc):
        m = len(xs)
        if m > best_len[0]:
            best_len[0] = m
            best[0] = (tuple(xs), tuple(ys))
        if m + min(bin(xc).count("1"), bin(yc).count("1")) <= best_len[0]:
            return
        for x in _bits(xc):
            for y in _bits(yc):
                # later y's must sit above x, later x's above y
                xs.append(x)
                ys.append(y)
                dfs(xs, ys, (xc & high_col[y]) & ~(1 << x), (yc & low[x]) & ~(1 << y))
                xs.pop()
                ys.pop()

    dfs([], [], (1 << nx) - 1, (1 << ny) - 1)
    return best_len[0], best[0]


def max_ladder_exact(f: PartiteFunction, delta, cap: int = EXACT_CAP) -> Tuple[int, LadderWitness]:
    """Maximum ladder length and one witness, by exhaustive search.

    For a ladder, let ``v`` be the largest value on its lower clause.  Then
    the ladder only uses pairs with ``f <= v`` below the diagonal and
    ``f > v + delta`` above it, so enumerating ``v`` over the distinct values
    of ``f`` is exhaustive.
    """
    _check_binary(f)
    delta = to_rational(delta)
    if delta < 0:
        raise ParameterError("delta must be nonnegative")
    nx, ny = f.shape
    if max(nx, ny) > cap:
        raise CapExceeded(f"exact ladder search capped at {cap} per side, got {nx}x{ny}")
    if nx == 0 or ny == 0:
        raise StructuralError("empty part")
    best_len, best_pair = 1, ((0,), (0,))
    for v in sorted(set(f.fractions().ravel().tolist())):
        if v + delta >= 1:
            break
        low, high_col = _threshold_masks(f, v, delta)
        length, pair = _longest(low, high_col, nx, ny, best_len)
        if length > best_len:
            best_len, best_pair = length, pair
    xs, ys = best_pair
    alpha = _alpha_for(f, xs, ys, delta)
    w = LadderWitness(xs, ys, alpha, delta)
    assert validate_ladder(f, w)
    return best_len, w


def max_ladder_greedy(f: PartiteFunction, delta, seed: int = 0,
                      iterations: int = 50) -> Tuple[int, LadderWitness]:
    """Randomised greedy lower bound; every returned witness is validated."""
    _check_binary(f)
    delta = to_rational(delta)
    nx, ny = f.shape
    if nx == 0 or ny == 0:
        raise StructuralError("empty part")
    rng = philox(seed)
    vals = f.fractions()
    levels = sorted(v for v in set(vals.ravel().tolist()) if v + delta < 1)
    rel = {v: (vals <= v, vals > v + delta) for v in levels}
    best = LadderWitness((0,), (0,), Fraction(0), delta)
    for _ in range(iterations if levels else 0):
        low, high = rel[levels[int(rng.integers(len(levels)))]]
        xs: List[int] = []
        ys: List[int] = []
        xc = np.ones(nx, dtype=bool)
        yc = np.ones(ny, dtype=bool)
        while xc.any() and yc.any():
            cx, cy = np.flatnonzero(xc), np.flatnonzero(yc)
            # room left for later steps if (x, y) is appended next
            rx = (high[:, cy] & xc[:, None]).sum(axis=0)[None, :] - high[cx][:, cy]
            ry = (low[cx][:, yc]).sum(axis=1)[:, None] - low[cx][:, cy]
            score = np.minimum(rx, ry) + rng.random((len(cx), len(cy)))
            a, b = np.unravel_index(int(score.argmax()), score.shape)
            x, y = int(cx[a]), int(cy[b])
            xs.append(x)
            ys.append(y)
            xc &= high[:, y]
            xc[x] = False
            yc &= low[x]
            yc[y] = False
        if len(xs) > len(best):
            alpha = _alpha_for(f, xs, ys, delta)
            w = LadderWitness(tuple(xs), tuple(ys), alpha, delta)
            if alpha is not None and validate_ladder(f, w):
                best = w
    return len(best), best
