import itertools
import math
from fractions import Fraction as Q

import numpy as np
import pytest

from stabreg.core import StructuralError
from stabreg.embedding import check_monotone, sample_common_sub
from stabreg.generators import TernaryInstance, WeightedPart, gen_gs_instance
from stabreg.gs3.classify import class_predicates, classify_pair, tag_name
from stabreg.gs3.partition import analyze, build_partition_P, merge_class, merge_parts
from stabreg.gs3.rfamily import (PAIRS, Rect, build_R_family, check_family_invariants,
                                 check_general_principle, compute_null_Z, enumerate_R_sR,
                                 verify_two_direction_claim)
from stabreg.gs3.tree import Gs3Context, PrefixTree, classify_prefix, compute_ix, i_sum
from stabreg.gs3.verify import corrupting_merge, verify_triple_homogeneity

from oracles import Part, naive_R_sR, pair_set


def seqs(*words):
    return [tuple(int(c) for c in w) for w in words]


def make(parts, orders=None):
    """``parts``: three lists of (word, weight)."""
    n = len(parts[0][0][0])
    wp = tuple(WeightedPart(seqs(*(w for w, _ in p)), [q for _, q in p]) for p in parts)
    inst = TernaryInstance(n, wp, 3)
    if orders is not None:
        inst = inst.with_orders([seqs(*o) for o in orders])
    return inst


def tree(pairs, n=2):
    return PrefixTree(seqs(*(w for w, _ in pairs)), [Q(q) for _, q in pairs], n)


# instances found by the monotone sampler, frozen
SC_LT = make([[("00", 0), ("20", 1), ("21", 0)], [("20", 0), ("10", 1), ("11", 0)], [("22", 0), ("21", 1)]],
             [["21", "20", "00"], ["11", "10", "20"], ["22", "21"]])
C_LT = make([[("02", 0), ("10", 1), ("11", 0)], [("01", 0), ("12", 0), ("10", 1)], [("20", 0), ("21", 1)]],
            [["02", "11", "10"], ["01", "10", "12"], ["21", "20"]])
C_EQ = make([[("010", "1/2"), ("111", 0), ("122", "1/8"), ("100", "3/8"), ("011", 0)],
             [("222", 0), ("210", 0), ("220", 1)],
             [("002", "1/4"), ("122", 0), ("120", 0), ("121", "3/4")]],
            [["010", "011", "111", "100", "122"], ["222", "220", "210"], ["002", "122", "120", "121"]])
# not monotone; classified with lexicographic orders
SC_EQ = make([[("01", 1), ("22", 0), ("20", 0)], [("11", 1), ("10", 0)], [("00", 0), ("01", "1/2"), ("12", "1/2")]])
HAND_C_EQ = make([[("00", 1), ("01", 0)], [("00", 1), ("01", 0)], [("10", "1/2"), ("20", "1/2")]])
R_EXAMPLE = make([[("01", "1/2"), ("00", "1/2")], [("00", 1)], [("00", 1)]])


def oracle_parts(inst):
    return [Part(p.labels, p.weights) for p in inst.parts]


# --- prefix trees ----------------------------------------------------------------------

def test_i_sum():
    assert i_sum((0,), (0,)) == (0,)
    assert i_sum((1,), (1,)) == (1,)
    assert i_sum((1, 2), (2, 2)) == (0, 2)
    with pytest.raises(StructuralError):
        i_sum((1,), (1, 2))


def test_classify_prefix_examples():
    s = classify_prefix(tree([("00", 1)]), (0,))
    assert s.non_splitting and s.extension == 0
    s = classify_prefix(tree([("00", "1/2"), ("02", "1/2")]), (0,))
    assert not s.non_splitting and s.large and s.positive == (0, 2)
    full = gen_gs_instance(3, 2)
    s = classify_prefix(Gs3Context(full).trees[0], (0,))
    assert s.directions == (0, 1, 2)
    with pytest.raises(StructuralError):
        classify_prefix(tree([("00", 1)]), (1,))


def test_split_of_null_children_is_not_large():
    s = classify_prefix(tree([("00", 1), ("01", 0)]), (0,))
    assert s.directions == (0, 1) and s.positive == (0,) and not s.large


def test_compute_ix_examples():
    t = tree([("00", "1/2"), ("11", "1/2")])
    assert all(math.isinf(compute_ix(t, x)) for x in seqs("00", "11"))
    t = tree([("00", 1), ("01", 0)])
    assert compute_ix(t, (0, 1)) == 2
    t = tree([("00", 1), ("10", 0)])
    assert compute_ix(t, (1, 0)) == 1


@pytest.mark.parametrize("inst", [SC_LT, C_EQ, SC_EQ])
def test_compute_ix_matches_oracle(inst):
    ctx = Gs3Context(inst)
    for u, P in enumerate(oracle_parts(inst)):
        for x in P.labels:
            assert ctx.ix[u][x] == P.ix(x)


# --- null ledgers ------------------------------------------------------------------------

def test_null_Z_examples():
    pos = make([[("00", "1/2"), ("10", "1/2")], [("00", 1)], [("00", 1)]])
    assert not any(z.any() for z in compute_null_Z(Gs3Context(pos)))
    one = make([[("00", "1/2"), ("10", "1/2"), ("20", 0)], [("00", 1)], [("00", 1)]])
    Z = compute_null_Z(Gs3Context(one))
    assert Z[0].tolist() == [False, False, True]
    a = analyze(one)
    assert all(a.ledger.measure(a.ctx, u, v) == 0 for u, v in PAIRS)


def test_RZ_examples():
    a = analyze(R_EXAMPLE)
    assert a.ledger.rects[(0, 1)] == []
    b = analyze(make([[("01", "1/2"), ("00", "1/2"), ("02", 0)], [("00", 1)], [("00", 1)]]))
    assert [r.describe() for r in b.ledger.rects[(0, 1)]] == ["RZ^1,2[02]x[00]"]
    assert b.ledger.measure(b.ctx, 0, 1) == 0


# --- R / sR families -----------------------------------------------------------------------

def test_R_example():
    ctx = Gs3Context(R_EXAMPLE)
    rects = enumerate_R_sR(ctx, 0, 1)
    assert rects == [Rect("R", 0, 1, (0, 1), (0, 0), 1)]
    assert naive_R_sR(oracle_parts(R_EXAMPLE), 2, 0, 1) == {((0, 1), (0, 0)): 1}


def test_no_R_sets_without_interactions():
    inst = make([[("00", 1)], [("00", 1)], [("00", 1)]])
    ctx = Gs3Context(inst)
    assert all(enumerate_R_sR(ctx, u, v) == [] for u, v in PAIRS)


def test_sR_absent_on_chains():
    inst = make([[("00", "1/2"), ("11", "1/2")], [("00", 1)], [("00", "1/2"), ("12", "1/2")]])
    ctx = Gs3Context(inst)
    assert not any(r.kind == "sR" for u, v in PAIRS for r in enumerate_R_sR(ctx, u, v))


def test_nested_sR_keeps_shorter():
    words = ["0" + a + b for a in "012" for b in "012"]
    part = [(w, Q(1, 9)) for w in words]
    ctx = Gs3Context(make([part, part, part]))
    for u, v in PAIRS:
        cands = enumerate_R_sR(ctx, u, v)
        assert {r.length for r in cands} == {2, 3}
        fam = build_R_family(ctx, u, v, cands)
        assert len(fam.members) == 9 and {r.length for r in fam.members} == {2}
        assert check_family_invariants(ctx, fam, cands).passed


def test_empty_family():
    ctx = Gs3Context(make([[("00", 1)], [("00", 1)], [("00", 1)]]))
    assert build_R_family(ctx, 0, 1).members == []


def _family_against_oracle(inst):
    ctx = Gs3Context(inst)
    P = oracle_parts(inst)
    for u, v in PAIRS:
        naive = naive_R_sR(P, inst.n, u, v)
        got = {(r.sigma, r.tau): (r.j0 if r.kind == "R" else "sR") for r in enumerate_R_sR(ctx, u, v)}
        assert got == naive
        fam = build_R_family(ctx, u, v)
        members = [pair_set(P, u, v, r.sigma, r.tau) for r in fam.members]
        for a, b in itertools.combinations(members, 2):
            assert not a & b
        assert all(r.measure(ctx) > 0 for r in fam.members)
        for (s, t) in naive:
            block = pair_set(P, u, v, s, t)
            assert any(block <= m for m in members)


@pytest.mark.parametrize("seed", range(6))
def test_family_against_oracle_sampled(seed):
    _family_against_oracle(sample_common_sub(seed, 3, (8, 8, 8), zero_fraction="2/5").instance)


@pytest.mark.parametrize("inst", [SC_LT, C_LT, C_EQ, SC_EQ, HAND_C_EQ])
def test_family_against_oracle_fixed(inst):
    _family_against_oracle(inst)


# --- general principle and the two-direction claim ---------------------------------------------

def test_general_principle_cases():
    ctx = Gs3Context(R_EXAMPLE)
    assert check_general_principle(ctx, (0, 1), (0, 0), (0, 0)) == ("R", (0, 1))
    assert check_general_principle(ctx, (0, 0), (0, 0), (0, 0))[0] == "inapplicable"
    words = ["0" + a + b for a in "012" for b in "012"]
    part = [(w, Q(1, 9)) for w in words]
    full = Gs3Context(make([part, part, part]))
    assert check_general_principle(full, (0, 1, 0), (0, 0, 0), (0, 0, 0)) == ("sR", None)


def test_two_direction_violation_on_full_gs3_2():
    out = verify_two_direction_claim(Gs3Context(gen_gs_instance(3, 2)))
    root = [v for v in out if v.sigmas == ((0,), (0,), (0,))]
    assert root and root[0].condition == "a" and "3 directions" in root[0].detail


def test_two_direction_single_points():
    assert verify_two_direction_claim(Gs3Context(make([[("01", 1)], [("12", 1)], [("22", 1)]]))) == []


@pytest.mark.parametrize("seed", range(5))
def test_two_direction_on_monotone_samples(seed):
    inst = sample_common_sub(seed, 3, (15, 15, 15)).instance
    assert verify_two_direction_claim(Gs3Context(inst)) == []


# --- classification ---------------------------------------------------------------------------

def _tags(inst):
    a = analyze(inst)
    out = {}
    for (u, v), P in a.partitions.items():
        for i, j in np.ndindex(*P.labels.shape):
            if P.labels[i, j] >= 0:
                out[(u, v, i, j)] = P.tags[P.labels[i, j]]
    return a, out


@pytest.mark.parametrize("inst", [SC_LT, C_LT, C_EQ, SC_EQ, HAND_C_EQ, R_EXAMPLE])
def test_classification_matches_literal_definitions(inst):
    a, tags = _tags(inst)
    for (u, v, i, j), t in tags.items():
        lit = class_predicates(a.ctx, u, v, i, j, a.families[(u, v)])
        want = ("R", a.families[(u, v)].member_of(a.ctx.labels[u][i], a.ctx.labels[v][j])) if t[0] == "R" else t
        assert lit == [want]


def test_hand_C_equal():
    a, tags = _tags(HAND_C_EQ)
    assert tag_name(tags[(0, 1, 1, 1)]) == "C^1=2_1"
    assert tag_name(tags[(0, 1, 0, 0)]) == "A"
    assert a.families[(0, 1)].members == []


def test_census_frozen():
    a = analyze(SC_LT)
    assert a.partitions[(0, 2)].census == {"A": 1, "C^1<=3_2": 2, "C^3<=1_2": 1, "sC^1<3_(2,0,2,2,1,2)": 2}
    assert a.partitions[(0, 2)].fubini_count == 1
    b = analyze(C_LT)
    assert b.partitions[(0, 2)].census["C^1<3_2"] == 1
    c = analyze(C_EQ)
    assert c.partitions[(0, 2)].census["C^1=3_1"] == 2
    d = analyze(SC_EQ)
    assert d.partitions[(1, 2)].census["sC^2=3_(0,1,1,0,1,1,0,2)"] >= 1


def test_atoms_outside_family_are_A():
    inst = make([[("00", "1/2"), ("11", "1/2")], [("00", "1/2"), ("22", "1/2")], [("00", 1)]])
    a, tags = _tags(inst)
    for (u, v, i, j), t in tags.items():
        assert t[0] in ("A", "R")
    assert any(t[0] == "A" for t in tags.values())


def test_classify_requires_ordered_pair():
    ctx = Gs3Context(R_EXAMPLE)
    with pytest.raises(StructuralError):
        classify_pair(ctx, 1, 0, 0, 0, build_R_family(ctx, 0, 1))


@pytest.mark.parametrize("seed", range(4))
def test_classification_invariant_under_storage_order(seed):
    inst = sample_common_sub(seed, 3, (10, 10, 10), zero_fraction="2/5").instance
    rev = TernaryInstance(inst.n, tuple(WeightedPart(p.labels[::-1], p.weights[::-1]) for p in inst.parts),
                          3, inst.orders)
    a, b = analyze(inst), analyze(rev)
    for (u, v) in PAIRS:
        P, R = a.partitions[(u, v)], b.partitions[(u, v)]
        for i, j in np.ndindex(*P.labels.shape):
            ri, rj = len(P.labels) - 1 - i, P.labels.shape[1] - 1 - j
            tp = None if P.labels[i, j] < 0 else P.tags[P.labels[i, j]]
            tr = None if R.labels[ri, rj] < 0 else R.tags[R.labels[ri, rj]]
            if tp is not None and tp[0] == "A":
                assert tr[0] == "A"
            elif tp is not None and tp[0] == "R":
                mp = a.families[(u, v)].members[tp[1]]
                mr = b.families[(u, v)].members[tr[1]]
                assert (mp.sigma, mp.tau) == (mr.sigma, mr.tau)
            else:
                assert tp == tr


# --- partitions and homogeneity ------------------------------------------------------------------

def test_all_atoms_give_singletons():
    inst = make([[("00", 1)], [("00", 1)], [("00", 1)]])
    a = analyze(inst)
    assert all(not f.members for f in a.families.values())
    for P in a.partitions.values():
        assert all(t[0] == "A" for t in P.tags) and len(P.tags) == P.labels.size


def test_R_example_partition():
    a = analyze(R_EXAMPLE)
    P = a.partitions[(0, 1)]
    assert P.tags[P.labels[0, 0]] == ("R", 0)
    assert P.total_measure() == 1 and P.ledger_measure == 0


@pytest.mark.parametrize("seed", range(6))
def test_partition_mass_and_homogeneity(seed):
    a = analyze(sample_common_sub(seed, 3, (20, 20, 20)).instance)
    for P in a.partitions.values():
        assert P.total_measure() == 1 and P.ledger_measure == 0
        assert not any(t[0].startswith("L") for t in P.tags)
        covered = (P.labels >= 0) | P.ledger
        assert covered.all() and not ((P.labels >= 0) & P.ledger).any()
    rep = verify_triple_homogeneity(a.ctx, a.partitions)
    assert rep.passed, rep.failures[:1]


def test_edgeless_instance_homogeneous():
    inst = make([[("00", "1/2"), ("02", "1/2")], [("00", 1)], [("00", 1)]])
    a = analyze(inst)
    assert not a.ctx.edges.any()
    rep = verify_triple_homogeneity(a.ctx, a.partitions, scope="all")
    assert rep.passed and all(c.side in (2, None) for c in rep.cells)


@pytest.mark.parametrize("seed", [0, 2, 3, 7])
def test_corrupted_partition_fails(seed):
    a = analyze(sample_common_sub(seed, 4, (30, 30, 30)).instance)
    rep = verify_triple_homogeneity(a.ctx, a.partitions)
    plan = corrupting_merge(rep)
    assert plan is not None
    parts = dict(a.partitions)
    for slot, (p, q) in plan.items():
        key = PAIRS[slot]
        parts[key] = merge_parts(parts[key], p, q)
    bad = verify_triple_homogeneity(a.ctx, parts)
    assert bad.failures and bad.failures[0].witness is not None
    x, y = bad.failures[0].witness
    assert a.ctx.edges[x] != a.ctx.edges[y]


def test_merge_helpers():
    a = analyze(SC_LT)
    P = a.partitions[(0, 2)]
    assert merge_parts(P, 1, 1) is P
    m = merge_class(P, "A")
    assert m.total_measure() == 1


def test_scope_validation():
    a = analyze(R_EXAMPLE)
    with pytest.raises(ValueError):
        verify_triple_homogeneity(a.ctx, a.partitions, scope="some")
