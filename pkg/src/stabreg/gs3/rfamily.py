"""R / sR rectangles, the family ℛ^{u,v}, null ledgers and the structural claims."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core import StructuralError
from .tree import Gs3Context, Seq, i_sum

PAIRS = ((0, 1), (0, 2), (1, 2))


def third(u: int, v: int) -> int:
    return 3 - u - v


def _mask(ctx: Gs3Context, u: int, sigma: Seq) -> np.ndarray:
    cache = ctx.__dict__.setdefault("_mask_cache", {})
    key = (u, tuple(sigma))
    if key not in cache:
        cache[key] = ctx.trees[u].members_under(sigma)
    return cache[key]


@dataclass(frozen=True)
class Rect:
    """``[sigma] x [tau]`` inside ``X^u x X^v`` (always ``u < v``)."""

    kind: str  # "R", "sR", "RZ", "sRZ"
    u: int
    v: int
    sigma: Seq
    tau: Seq
    j0: Optional[int] = None

    @property
    def length(self) -> int:
        return len(self.sigma)

    def rows(self, ctx: Gs3Context) -> np.ndarray:
        return _mask(ctx, self.u, self.sigma)

    def cols(self, ctx: Gs3Context) -> np.ndarray:
        return _mask(ctx, self.v, self.tau)

    def measure(self, ctx: Gs3Context) -> Fraction:
        return ctx.trees[self.u].mu(self.sigma) * ctx.trees[self.v].mu(self.tau)

    def contains_pair(self, x: Seq, y: Seq) -> bool:
        return x[:len(self.sigma)] == self.sigma and y[:len(self.tau)] == self.tau

    def describe(self) -> str:
        s = "".join(map(str, self.sigma)) or "<>"
        t = "".join(map(str, self.tau)) or "<>"
        extra = f" j0={self.j0}" if self.j0 is not None else ""
        return f"{self.kind}^{self.u + 1},{self.v + 1}[{s}]x[{t}]{extra}"


def _rect(kind, u, v, sigma, tau, j0=None) -> Rect:
    # store with the smaller part first
    if u > v:
        u, v, sigma, tau = v, u, tau, sigma
    return Rect(kind, u, v, tuple(sigma), tuple(tau), j0)


def is_R(ctx: Gs3Context, u: int, v: int, sigma: Seq, tau: Seq) -> Optional[int]:
    """``j0`` if ``[sigma] x [tau]`` satisfies the R-set conditions, else None."""
    tu, tv, tw = ctx.trees[u], ctx.trees[v], ctx.trees[third(u, v)]
    ell = len(sigma)
    if ell == 0 or len(tau) != ell or ell > ctx.n:
        return None
    if not (tu.mu(sigma) > 0 and tv.mu(tau) > 0):
        return None
    rho = i_sum(sigma[:-1], tau[:-1])
    if not tw.mu(rho) > 0 or not tw.non_splitting(rho):
        return None
    j0 = (sigma[-1] + tau[-1] + tw.extension(rho)) % 3
    return j0 or None


def is_sR(ctx: Gs3Context, u: int, v: int, sigma: Seq, tau: Seq) -> bool:
    tu, tv, tw = ctx.trees[u], ctx.trees[v], ctx.trees[third(u, v)]
    ell = len(sigma)
    if ell == 0 or len(tau) != ell or ell > ctx.n:
        return False
    if not (tu.mu(sigma) > 0 and tv.mu(tau) > 0):
        return False
    rho = i_sum(sigma[:-1], tau[:-1])
    return bool(tw.mu(rho) > 0 and tu.splits(sigma[:-1]) and tv.splits(tau[:-1]) and tw.splits(rho))


def enumerate_R_sR(ctx: Gs3Context, u: int, v: int) -> List[Rect]:
    """Every R and sR rectangle for the pair, scanning positive-mass prefixes by length."""
    if u > v:
        u, v = v, u
    tu, tv, tw = ctx.trees[u], ctx.trees[v], ctx.trees[third(u, v)]
    out = []
    for ell in range(1, ctx.n + 1):
        for sigma in tu.prefixes(ell, positive=True):
            for tau in tv.prefixes(ell, positive=True):
                rho = i_sum(sigma[:-1], tau[:-1])
                if not tw.mu(rho) > 0:
                    continue
                if tw.non_splitting(rho):
                    j0 = (sigma[-1] + tau[-1] + tw.extension(rho)) % 3
                    if j0:
                        out.append(Rect("R", u, v, sigma, tau, j0))
                elif tu.splits(sigma[:-1]) and tv.splits(tau[:-1]):
                    out.append(Rect("sR", u, v, sigma, tau))
    for r in out:
        ok = is_R(ctx, u, v, r.sigma, r.tau) == r.j0 if r.kind == "R" else is_sR(ctx, u, v, r.sigma, r.tau)
        if not ok:
            raise StructuralError(f"enumerated {r.describe()} fails its definition")
    return out


def rect_subset(ctx: Gs3Context, a: Rect, b: Rect) -> bool:
    """``a ⊆ b`` as sets of pairs of members (``a`` nonempty)."""
    ra, ca, rb, cb = a.rows(ctx), a.cols(ctx), b.rows(ctx), b.cols(ctx)
    return bool(ra.any() and ca.any() and not (ra & ~rb).any() and not (ca & ~cb).any())


def rect_disjoint(ctx: Gs3Context, a: Rect, b: Rect) -> bool:
    return not ((a.rows(ctx) & b.rows(ctx)).any() and (a.cols(ctx) & b.cols(ctx)).any())


@dataclass
class RFamily:
    u: int
    v: int
    members: List[Rect]

    def member_of(self, x: Seq, y: Seq) -> Optional[int]:
        for i, r in enumerate(self.members):
            if r.contains_pair(x, y):
                return i
        return None


def build_R_family(ctx: Gs3Context, u: int, v: int, candidates: Optional[List[Rect]] = None) -> RFamily:
    """sR sets by increasing length unless already covered, then the uncovered R sets."""
    if u > v:
        u, v = v, u
    cands = enumerate_R_sR(ctx, u, v) if candidates is None else candidates
    key = lambda r: (r.length, r.sigma, r.tau)
    chosen: List[Rect] = []
    for r in sorted((r for r in cands if r.kind == "sR"), key=key):
        if not any(rect_subset(ctx, r, s) for s in chosen):
            chosen.append(r)
    srs = list(chosen)
    for r in sorted((r for r in cands if r.kind == "R"), key=key):
        if not any(rect_subset(ctx, r, s) for s in srs):
            chosen.append(r)
    return RFamily(u, v, chosen)


@dataclass
class FamilyCheck:
    disjoint: bool
    positive: bool
    complete: bool
    problems: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.disjoint and self.positive and self.complete


def check_family_invariants(ctx: Gs3Context, fam: RFamily,
                            candidates: Optional[List[Rect]] = None) -> FamilyCheck:
    """Disjointness, positive measure and completeness against the enumeration."""
    cands = enumerate_R_sR(ctx, fam.u, fam.v) if candidates is None else candidates
    problems = []
    disjoint = True
    for a, b in itertools.combinations(fam.members, 2):
        if not rect_disjoint(ctx, a, b):
            disjoint = False
            problems.append(f"overlap {a.describe()} / {b.describe()}")
    positive = True
    for r in fam.members:
        if not r.measure(ctx) > 0:
            positive = False
            problems.append(f"null member {r.describe()}")
    complete = True
    for r in cands:
        if not any(rect_subset(ctx, r, m) for m in fam.members):
            complete = False
            problems.append(f"uncovered {r.describe()}")
    return FamilyCheck(disjoint, positive, complete, problems)


@dataclass
class NullLedger:
    """Measure-0 sets: the points ``Z^u`` and the RZ / sRZ rectangles per pair."""

    Z: Tuple[np.ndarray, np.ndarray, np.ndarray]
    rects: Dict[Tuple[int, int], List[Rect]]

    def z_pair(self, u: int, v: int) -> np.ndarray:
        return self.Z[u][:, None] | self.Z[v][None, :]

    def rect_mask(self, ctx: Gs3Context, u: int, v: int) -> np.ndarray:
        out = np.zeros((len(ctx.labels[u]), len(ctx.labels[v])), dtype=bool)
        for r in self.rects.get((u, v), []):
            out |= r.rows(ctx)[:, None] & r.cols(ctx)[None, :]
        return out

    def mask(self, ctx: Gs3Context, u: int, v: int) -> np.ndarray:
        return self.z_pair(u, v) | self.rect_mask(ctx, u, v)

    def measure(self, ctx: Gs3Context, u: int, v: int) -> Fraction:
        m = self.mask(ctx, u, v)
        wu, wv = ctx.inst.parts[u].weights, ctx.inst.parts[v].weights
        return sum((wu[i] * wv[j] for i, j in zip(*np.nonzero(m))), Fraction(0))


def compute_null_Z(ctx: Gs3Context) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``Z^u``: members whose path leaves positive mass right after a large-split level."""
    levels = sorted(ctx.large_split_lengths())
    out = []
    for t in ctx.trees:
        out.append(np.array([any(t.mu(x[:ell]) > 0 and t.mu(x[:ell + 1]) == 0 for ell in levels)
                             for x in t.labels], dtype=bool))
    return tuple(out)


def _siblings(prefix: Seq) -> List[Seq]:
    return [tuple(prefix[:-1]) + (j,) for j in range(3)]


def compute_RZ(ctx: Gs3Context, families: Dict[Tuple[int, int], RFamily],
               candidates: Dict[Tuple[int, int], List[Rect]]) -> Dict[Tuple[int, int], List[Rect]]:
    """Null rectangles next to every R set and around every sR member of the family.

    Only siblings present in their parts are kept; the others are empty.
    """
    rects: Dict[Tuple[int, int], set] = {p: set() for p in PAIRS}
    T = ctx.trees
    for (u, v), cands in candidates.items():
        w = third(u, v)
        for r in cands:
            if r.kind != "R":
                continue
            for s in _siblings(r.sigma):
                for t in _siblings(r.tau):
                    if T[u].present(s) and T[v].present(t) and (T[u].mu(s) == 0 or T[v].mu(t) == 0):
                        rects[(u, v)].add(_rect("RZ", u, v, s, t))
        for r in families[(u, v)].members:
            if r.kind != "sR":
                continue
            rho_pre = i_sum(r.tau[:-1], r.sigma[:-1])
            for s in _siblings(r.sigma):
                for t in _siblings(r.tau):
                    for j in range(3):
                        rho = rho_pre + (j,)
                        for (a, pa, b, pb) in ((u, s, v, t), (u, s, w, rho), (v, t, w, rho)):
                            if T[a].present(pa) and T[b].present(pb) and (T[a].mu(pa) == 0 or T[b].mu(pb) == 0):
                                r2 = _rect("sRZ", a, b, pa, pb)
                                rects[(r2.u, r2.v)].add(r2)
    return {p: sorted(s, key=lambda r: (r.kind, r.length, r.sigma, r.tau)) for p, s in rects.items()}


def build_ledger(ctx: Gs3Context):
    """Candidates, families and the null ledger for all three pairs."""
    cands = {p: enumerate_R_sR(ctx, *p) for p in PAIRS}
    fams = {p: build_R_family(ctx, *p, candidates=cands[p]) for p in PAIRS}
    ledger = NullLedger(compute_null_Z(ctx), compute_RZ(ctx, fams, cands))
    return cands, fams, ledger


def check_general_principle(ctx: Gs3Context, x: Seq, y: Seq, z: Seq) -> Tuple[str, object]:
    """Which disjunct of the general principle holds for a triple of members.

    Returns ``("R", (u, v))`` for the first pair whose level-(i+1) rectangle is
    an R set, ``("sR", None)`` if all three pairs give sR sets,
    ``("inapplicable", reason)`` when the precondition fails, and
    ``("violation", i)`` if neither disjunct holds.
    """
    x, y, z = tuple(x), tuple(y), tuple(z)
    if z == i_sum(x, y):
        return "inapplicable", "z = I(x,y)"
    i = next(k for k in range(ctx.n) if (x[k] + y[k] + z[k]) % 3)
    pts = (x, y, z)
    if not all(ctx.trees[u].mu(pts[u][:i + 1]) > 0 for u in range(3)):
        return "inapplicable", "a level-(i+1) prefix is null"
    for u, v in PAIRS:
        if is_R(ctx, u, v, pts[u][:i + 1], pts[v][:i + 1]) is not None:
            return "R", (u, v)
    if all(is_sR(ctx, u, v, pts[u][:i + 1], pts[v][:i + 1]) for u, v in PAIRS):
        return "sR", None
    return "violation", i


@dataclass
class TwoDirectionViolation:
    sigmas: Tuple[Seq, Seq, Seq]
    condition: str  # "a", "b" or "c"
    detail: str


def _ordered_pair(tree, sigma: Seq) -> Optional[Tuple[int, int]]:
    d = tree.directions(sigma)
    if len(d) != 2:
        return None
    a, b = sigma + (d[0],), sigma + (d[1],)
    if tree.all_below(a, b):
        return d[0], d[1]
    if tree.all_below(b, a):
        return d[1], d[0]
    return None


def verify_two_direction_claim(ctx: Gs3Context) -> List[TwoDirectionViolation]:
    """For aligned present triples of proper prefixes, either some prefix is
    non-splitting, or all split in exactly two order-coherent directions with
    the dominance property over the eight sign patterns."""
    out = []
    T = ctx.trees
    for ell in range(ctx.n):
        for s1 in T[0].prefixes(ell):
            for s2 in T[1].prefixes(ell):
                s3 = i_sum(s1, s2)
                if not T[2].present(s3):
                    continue
                sig = (s1, s2, s3)
                if any(T[u].non_splitting(sig[u]) for u in range(3)):
                    continue
                wide = [u for u in range(3) if len(T[u].directions(sig[u])) != 2]
                if wide:
                    out.append(TwoDirectionViolation(
                        sig, "a", "; ".join(f"part {u + 1} splits in {len(T[u].directions(sig[u]))} directions"
                                            for u in wide)))
                    continue
                pairs = [_ordered_pair(T[u], sig[u]) for u in range(3)]
                if any(p is None for p in pairs):
                    out.append(TwoDirectionViolation(sig, "b", "branches not separated by the order"))
                    continue
                for t in itertools.product((0, 1), repeat=3):
                    if sum(pairs[u][t[u]] for u in range(3)) % 3:
                        continue
                    ok = False
                    for tp in itertools.product((0, 1), repeat=3):
                        s = sum(pairs[u][tp[u]] for u in range(3)) % 3
                        below = all(a <= b for a, b in zip(tp, t))
                        above = all(b <= a for a, b in zip(tp, t))
                        if (below and s == 1) or (above and s == 2):
                            ok = True
                            break
                    if not ok:
                        out.append(TwoDirectionViolation(sig, "c", f"pattern {tuple(v + 1 for v in t)}"))
    return out
