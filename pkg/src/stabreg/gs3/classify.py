"""Classification of pairs outside ℛ and the null ledger.

``classify_pair`` follows the case analysis on ``i(x), i(y)``;
``class_predicates`` evaluates every class definition literally and is the
independent oracle for "exactly one class".

Tags are tuples:

* ``("R", k)``: member ``k`` of the family,
* ``("Null", reason)``,
* ``("A", x, y)``,
* ``("C<=", a, b, j0)``, ``("C<", a, b, j0)`` with ``a`` the part of the
  coordinate with the smaller ``i``,
* ``("C=", u, v, j0)`` with ``u < v``,
* ``("sC<", a, b, (j1, j2, s, jv, jw1, jw2))``,
* ``("sC=", u, v, (ju1, ju2, su, jv1, jv2, sv, jw1, jw2))``.

Limit classes cannot occur on finite instances (``i`` is never a limit).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..core import StructuralError
from .rfamily import RFamily, third
from .tree import Gs3Context, Seq, i_sum

Tag = Tuple


@dataclass(frozen=True)
class PairClassification:
    tag: Tag
    aux: Dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def fubini_null(self) -> bool:
        """C<= pairs with ``j'' != y(i(x)-1)``; routed to the ledger for verification."""
        return bool(self.aux.get("fubini"))


def tag_name(tag: Tag) -> str:
    kind = tag[0]
    if kind in ("R", "Null", "A"):
        return kind if kind != "Null" else f"Null({tag[1]})"
    a, b = tag[1] + 1, tag[2] + 1
    if kind == "C<=":
        return f"C^{a}<={b}_{tag[3]}"
    if kind == "C<":
        return f"C^{a}<{b}_{tag[3]}"
    if kind == "C=":
        return f"C^{a}={b}_{tag[3]}"
    params = ",".join(map(str, tag[3]))
    return f"sC^{a}{'<' if kind == 'sC<' else '='}{b}_({params})"


def _unique_positive(tree, prefix: Seq, what: str) -> int:
    pos = tree.positive_directions(prefix)
    if len(pos) != 1:
        raise StructuralError(f"{what}: prefix {prefix} has positive directions {pos}; "
                              "the pair should have been caught by the Z ledger")
    return pos[0]


def _order_two(tree, prefix: Seq, mine: int, other: int) -> Tuple[int, int, int]:
    """``(j1, j2, s)`` with ``[prefix⌢j1]`` below ``[prefix⌢j2]`` and ``mine = j_s``.

    Falls back to comparing extreme ranks when the two branches interleave.
    """
    a, b = prefix + (mine,), prefix + (other,)
    if tree.all_below(a, b) or (not tree.all_below(b, a) and tree.lo[a] < tree.lo[b]):
        return mine, other, 1
    return other, mine, 2


def _least_w_pair(tree, rho: Seq, strict: bool) -> Tuple[int, int]:
    dirs = tree.directions(rho)
    for a in range(3):
        for b in range(3):
            if a == b or a not in dirs or b not in dirs:
                continue
            ra, rb = rho + (a,), rho + (b,)
            if (tree.all_below(ra, rb) if strict else tree.some_below(ra, rb)):
                return a, b
    if strict:
        return _least_w_pair(tree, rho, False)
    raise StructuralError(f"{rho} does not split")


def _case_analysis(ctx: Gs3Context, u: int, x: Seq, v: int, y: Seq) -> PairClassification:
    """Case analysis for a pair outside ℛ, the ledgers and the atom pairs."""
    ix, iy = ctx.ix[u][x], ctx.ix[v][y]
    if ix > iy:
        u, x, v, y, ix, iy = v, y, u, x, iy, ix
    if math.isinf(ix):
        raise StructuralError(f"pair of atoms {x},{y} reached the case analysis")
    p = ix - 1
    w = third(u, v)
    Tx, Ty, Tw = ctx.trees[u], ctx.trees[v], ctx.trees[w]
    j1 = _unique_positive(Tx, x[:p], "j'")
    rho = i_sum(x[:p], y[:p])
    aux = {"i": (ix, iy), "p": p, "j1": j1}
    if ix == iy:
        j2 = _unique_positive(Ty, y[:p], "j''")
        aux["j2"] = j2
        lo, hi = min(u, v), max(u, v)
        if not Tw.present(rho):
            return PairClassification(("C=", lo, hi, 1), aux)
        if Tw.non_splitting(rho):
            j = Tw.extension(rho)
            aux["j"] = j
            a = (x[p] + j2 + j) % 3
            b = (j1 + y[p] + j) % 3
            if a == 0 and b == 0:
                return PairClassification(("C=", lo, hi, (x[p] + y[p] + j) % 3), aux)
            aux["fubini"] = True
            if u > v:
                u, x, v, y, a, b = v, y, u, x, b, a
            # now u < v
            if a:
                return PairClassification(("C<=", u, v, a), aux)
            return PairClassification(("C<=", v, u, b), aux)
        pu = _order_two(Tx, x[:p], x[p], j1)
        pv = _order_two(Ty, y[:p], y[p], j2)
        pw = _least_w_pair(Tw, rho, strict=True)
        if u > v:
            pu, pv = pv, pu
        return PairClassification(("sC=", lo, hi, pu + pv + pw), aux)
    j2 = y[p]
    if not Ty.mu(y[:p + 1]) > 0:
        raise StructuralError(f"{y} should have positive mass at depth {p + 1}")
    aux["j2"] = j2
    if not Tw.present(rho):
        return PairClassification(("C<", u, v, 1), aux)
    if Tw.non_splitting(rho):
        j = Tw.extension(rho)
        aux["j"] = j
        a = (x[p] + j2 + j) % 3
        if a:
            return PairClassification(("C<=", u, v, a), aux)
        return PairClassification(("C<", u, v, (j1 + y[p] + j) % 3), aux)
    s = 1 if ctx.trees[u].rank[x] < Tx.hi[x[:p] + (j1,)] else 2
    ju = (x[p], j1) if s == 1 else (j1, x[p])
    pw = _least_w_pair(Tw, rho, strict=False)
    return PairClassification(("sC<", u, v, ju + (s, y[p]) + pw), aux)


def classify_pair(ctx: Gs3Context, u: int, v: int, xi: int, yi: int, family: RFamily,
                  ledger_mask=None) -> PairClassification:
    """Class of ``(X^u[xi], X^v[yi])`` for ``u < v``: ℛ first, then the ledgers,
    then atom pairs, then the case analysis."""
    if u > v:
        raise StructuralError("classify pairs with u < v")
    x, y = ctx.labels[u][xi], ctx.labels[v][yi]
    k = family.member_of(x, y)
    if k is not None:
        return PairClassification(("R", k))
    if ledger_mask is not None and ledger_mask[xi, yi]:
        return PairClassification(("Null", "ledger"))
    if math.isinf(ctx.ix[u][x]) and math.isinf(ctx.ix[v][y]):
        return PairClassification(("A", xi, yi))
    return _case_analysis(ctx, u, x, v, y)


# literal definitions ---------------------------------------------------------

def _positive_children(tree, prefix: Seq) -> List[int]:
    return [j for j in range(3) if tree.mu(prefix + (j,)) > 0]


def _present_children(tree, prefix: Seq) -> List[int]:
    return [j for j in range(3) if tree.present(prefix + (j,))]


def _all_lt(tree, A: Seq, B: Seq) -> bool:
    xs = [tree.rank[s] for s in tree.labels if s[:len(A)] == A]
    ys = [tree.rank[s] for s in tree.labels if s[:len(B)] == B]
    return all(a < b for a in xs for b in ys)


def _exists_lt(tree, A: Seq, B: Seq) -> bool:
    xs = [tree.rank[s] for s in tree.labels if s[:len(A)] == A]
    ys = [tree.rank[s] for s in tree.labels if s[:len(B)] == B]
    return any(a < b for a in xs for b in ys)


def _shared(ctx, a, x, b, y):
    """Conditions (2)-(5) common to the C-type definitions, or None."""
    ix, iy = ctx.ix[a][x], ctx.ix[b][y]
    if math.isinf(ix) or ix < 1:
        return None
    p = ix - 1
    Tx, Ty = ctx.trees[a], ctx.trees[b]
    jp = _positive_children(Tx, x[:p])
    if len(jp) != 1:
        return None
    return ix, iy, p, jp[0], _positive_children(Ty, y[:p])


def class_predicates(ctx: Gs3Context, u: int, v: int, xi: int, yi: int, family: RFamily) -> List[Tag]:
    """Every class whose defining conditions hold for the pair (read literally)."""
    x, y = ctx.labels[u][xi], ctx.labels[v][yi]
    if any(r.contains_pair(x, y) for r in family.members):
        return [("R", family.member_of(x, y))]
    out: List[Tag] = []
    if math.isinf(ctx.ix[u][x]) and math.isinf(ctx.ix[v][y]):
        out.append(("A", xi, yi))
    for a, xa, b, yb in ((u, x, v, y), (v, y, u, x)):
        sh = _shared(ctx, a, xa, b, yb)
        if sh is None:
            continue
        ix, iy, p, j1, jpp = sh
        w = third(a, b)
        Tw = ctx.trees[w]
        rho = tuple((-(s + t)) % 3 for s, t in zip(xa[:p], yb[:p]))
        kids = _present_children(Tw, rho) if Tw.present(rho) else []
        nonsplit = Tw.present(rho) and len(kids) == 1
        j = kids[0] if nonsplit else None
        # C<=
        if ix <= iy and len(jpp) == 1 and nonsplit:
            j2 = jpp[0]
            j0 = (xa[p] + j2 + j) % 3
            second = (j1 + yb[p] + j) % 3
            if j0 and (a < b or ix < iy):
                out.append(("C<=", a, b, j0))
            elif j0 and a > b and ix == iy and second == 0:
                out.append(("C<=", a, b, j0))
        # C<
        if ix < iy and len(jpp) == 1:
            j2 = jpp[0]
            if not Tw.present(rho):
                out.append(("C<", a, b, 1))
            elif nonsplit and (xa[p] + j2 + j) % 3 == 0 and (j1 + yb[p] + j) % 3:
                out.append(("C<", a, b, (j1 + yb[p] + j) % 3))
        # C= (one orientation; the definition is symmetric)
        if a < b and ix == iy and len(jpp) == 1:
            j2 = jpp[0]
            if not Tw.present(rho):
                out.append(("C=", a, b, 1))
            elif nonsplit and (xa[p] + j2 + j) % 3 == 0 and (j1 + yb[p] + j) % 3 == 0:
                out.append(("C=", a, b, (xa[p] + yb[p] + j) % 3))
        # sC<
        if ix < iy and Tw.present(rho) and len(kids) >= 2:
            Tx = ctx.trees[a]
            cousins = [s for s in Tx.labels if s[:p + 1] == xa[:p] + (j1,)]
            if any(Tx.rank[xa] < Tx.rank[s] for s in cousins):
                s_, ju = 1, (xa[p], j1)
            else:
                s_, ju = 2, (j1, xa[p])
            pw = next((c1, c2) for c1 in range(3) for c2 in range(3)
                      if c1 != c2 and c1 in kids and c2 in kids
                      and _exists_lt(Tw, rho + (c1,), rho + (c2,)))
            out.append(("sC<", a, b, ju + (s_, yb[p]) + pw))
        # sC=
        if a < b and ix == iy and Tw.present(rho):
            Tx, Ty = ctx.trees[a], ctx.trees[b]
            dx, dy = _present_children(Tx, xa[:p]), _present_children(Ty, yb[:p])
            if len(dx) == len(dy) == len(kids) == 2:
                params = []
                for T, pre, d, own in ((Tx, xa[:p], dx, xa[p]), (Ty, yb[:p], dy, yb[p])):
                    lo_hi = [(c1, c2) for c1, c2 in (d, d[::-1]) if _all_lt(T, pre + (c1,), pre + (c2,))]
                    if not lo_hi:
                        break
                    c1, c2 = lo_hi[0]
                    params.append((c1, c2, 1 if own == c1 else 2))
                wp = [(c1, c2) for c1, c2 in (kids, kids[::-1]) if _all_lt(Tw, rho + (c1,), rho + (c2,))]
                if len(params) == 2 and wp:
                    out.append(("sC=", a, b, params[0] + params[1] + tuple(wp[0])))
    return out
