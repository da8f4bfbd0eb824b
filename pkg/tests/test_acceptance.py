"""End-to-end acceptance suite: one test per criterion, each printing a verdict line."""
import itertools
import time
from fractions import Fraction as Q

import numpy as np
import pytest

from stabreg.core import BudgetFn, GradedPartition, PartiteFunction, WeightedPart
from stabreg.embedding import check_monotone, sample_common_sub
from stabreg.generators import (FunctionFamily, Hypergraph3, level_set_estimate, direct_integral,
                                eval_average, gen_gs_instance, gen_halfsimplex_grid, gen_parity_system,
                                gen_random_average, gs_edge, gs_edge_tensor, philox, product_combiner,
                                random_graph)
from stabreg.gs3.partition import analyze, merge_parts
from stabreg.gs3.rfamily import PAIRS, check_family_invariants, verify_two_direction_claim
from stabreg.gs3.tree import Gs3Context
from stabreg.gs3.verify import corrupting_merge, verify_triple_homogeneity
from stabreg.regularity.construct import build_regular_partition_avg
from stabreg.regularity.energy import energy_refine
from stabreg.regularity.quasirandom import disc2_exact, verify_disc23_triad
from stabreg.regularity.verify import verify_strong_regularity
from stabreg.stability import max_ladder_exact

from oracles import disc2_brute, ladder_oracle, naive_gs_edge, parity_value, triad_brute


@pytest.fixture
def verdict(request, capsys):
    """Times the test body and prints ``criterion N: PASS|FAIL (t s, limit L s)``."""
    state = {}

    def start(number, limit):
        state.update(number=number, limit=limit, t0=time.perf_counter())

    yield start
    elapsed = time.perf_counter() - state["t0"]
    failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
    ok = not failed and elapsed < state["limit"]
    with capsys.disabled():
        print(f"\ncriterion {state['number']}: {'PASS' if ok else 'FAIL'} "
              f"({elapsed:.2f} s, limit {state['limit']} s)")
    assert elapsed < state["limit"], f"criterion {state['number']} exceeded its time limit"


def test_criterion_01_gs_edge_oracle(verdict):
    verdict(1, 1)
    for n in (1, 2):
        seqs = list(itertools.product(range(3), repeat=n))
        for x, y, z in itertools.product(seqs, repeat=3):
            assert gs_edge(3, x, y, z) == naive_gs_edge(3, x, y, z)
        pts = np.array(seqs)
        T = gs_edge_tensor(3, pts, pts, pts)
        for (i, x), (j, y), (k, z) in itertools.product(enumerate(seqs), repeat=3):
            assert T[i, j, k] == naive_gs_edge(3, x, y, z)


def test_criterion_02_parity_encoding(verdict):
    verdict(2, 1)
    parts = [WeightedPart.uniform(range(6)) for _ in range(3)]
    for seed in range(20):
        rng = philox(seed)
        g = [random_graph(rng, 6, 6) for _ in range(3)]
        system = gen_parity_system(parts, *(np.argwhere(x).tolist() for x in g))
        for t in itertools.product(range(6), repeat=3):
            assert eval_average(system, t) == parity_value(*g, *t)


def test_criterion_03_monotonicity(verdict):
    verdict(3, 5)
    pts = np.array(list(itertools.product(range(3), repeat=2)))
    labels = tuple(tuple(map(tuple, pts)) for _ in range(3))
    assert not check_monotone(Hypergraph3(labels, gs_edge_tensor(3, pts, pts, pts))).monotone
    assert check_monotone(gen_halfsimplex_grid(11)).monotone


def test_criterion_04_ladder_oracle(verdict):
    verdict(4, 60)
    X = WeightedPart.uniform(range(6))
    for seed in range(50):
        vals = philox(seed).integers(0, 11, size=(6, 6))
        F = [[Q(int(v), 10) for v in row] for row in vals]
        f = PartiteFunction.from_fractions((X, X), F)
        for delta in (Q(1, 10), Q(3, 10)):
            assert max_ladder_exact(f, delta)[0] == ladder_oracle(F, delta)


def test_criterion_05_strong_regularity(verdict):
    verdict(5, 30)
    eps = Q(1, 100)
    budgets = [BudgetFn.parse(b) for b in ("const:1/2", "recip:1/100", "exp:1/100")]
    for seed in range(10):
        rng = philox(1000 + seed)
        sizes = tuple(int(s) for s in rng.integers(4, 49, size=3))
        omega = int(rng.integers(2, 13))
        system = gen_random_average(seed, sizes, omega, "1/2")
        f = system.to_function()
        for b in budgets:
            res = build_regular_partition_avg(system, eps, b)
            rep = verify_strong_regularity(f, res.partition, eps, b)
            assert rep.passed and rep.failures == []
            assert all(m == 0 for m in rep.exceptional_sides.values())
    # adversarial cell: half the mass at 0, half at 1
    X, Y = WeightedPart.uniform(range(1)), WeightedPart.uniform(range(2))
    f = PartiteFunction.from_fractions((X, Y), [[Q(0), Q(1)]])
    P = GradedPartition(2, 1, (1, 2), {(0,): np.ones(1, np.int64), (1,): np.ones(2, np.int64)})
    rep = verify_strong_regularity(f, P, Q(1, 10), BudgetFn.parse("const:1/4"))
    (bad,) = rep.failures
    assert bad.witness == ((0, 0), (0, 1))


def test_criterion_06_disc_oracles(verdict):
    verdict(6, 60)
    for seed in range(30):
        G = random_graph(philox(seed), 5, 5)
        assert disc2_exact(G) == disc2_brute(G.astype(int).tolist())
    for seed in range(4):
        rng = philox(500 + seed)
        g = [random_graph(rng, 4, 4) for _ in range(3)]
        E = rng.integers(0, 2, size=(4, 4, 4)).astype(bool)
        st = verify_disc23_triad(E, tuple(g), Q(1, 10))
        assert st.deviation == triad_brute(E.astype(int).tolist(), *(x.astype(int).tolist() for x in g))


def test_criterion_07_energy(verdict):
    verdict(7, 60)
    for seed in range(100):
        rng = philox(seed)
        a, b = (int(v) for v in rng.integers(2, 7, size=2))
        parts = (WeightedPart.uniform(range(a)), WeightedPart.uniform(range(b)))
        indicator = seed % 2 == 0
        if indicator:
            F = rng.integers(0, 2, size=(a, b)).tolist()
        else:
            F = [[Q(int(v), 4) for v in row] for row in rng.integers(0, 5, size=(a, b))]
        f = PartiteFunction.from_fractions(parts, F)
        run = energy_refine(f, steps=6)
        assert all(x <= y for x, y in zip(run.energies, run.energies[1:]))
        if indicator:
            d = Q(int(np.sum(F)), a * b)
            assert all(d * d <= en <= d for en in run.energies)


def test_criterion_08_gs3_pipeline(verdict):
    verdict(8, 300)
    for seed in range(25):
        n = 2 + seed % 3
        size = 20 + 8 * (seed % 6)
        res = sample_common_sub(seed, n, (size, size, size), zero_fraction="1/5")
        inst = res.instance
        for p in inst.parts:
            assert 5 * sum(1 for w in p.weights if w == 0) >= len(p.weights)
            assert len(p.labels) <= 60
        a = analyze(inst)
        for key in PAIRS:
            P = a.partitions[key]
            assert sum(P.masses, Q(0)) + P.ledger_measure == 1 and P.ledger_measure == 0
            chk = check_family_invariants(a.ctx, a.families[key], a.candidates[key])
            assert chk.passed, chk.problems
        assert verify_two_direction_claim(a.ctx) == []
        rep = verify_triple_homogeneity(a.ctx, a.partitions)
        assert rep.passed and rep.failures == []


def test_criterion_09_negative_control(verdict):
    verdict(9, 5)
    out = verify_two_direction_claim(Gs3Context(gen_gs_instance(3, 2)))
    root = [v for v in out if v.sigmas == ((0,), (0,), (0,))]
    assert root and root[0].condition == "a" and "3 directions" in root[0].detail
    a = analyze(sample_common_sub(0, 4, (30, 30, 30)).instance)
    rep = verify_triple_homogeneity(a.ctx, a.partitions)
    plan = corrupting_merge(rep)
    assert plan is not None
    parts = dict(a.partitions)
    for slot, (p, q) in plan.items():
        parts[PAIRS[slot]] = merge_parts(parts[PAIRS[slot]], p, q)
    bad = verify_triple_homogeneity(a.ctx, parts)
    assert bad.failures and bad.failures[0].witness is not None
    x, y = bad.failures[0].witness
    assert a.ctx.edges[x] != a.ctx.edges[y]


def test_criterion_10_level_set_pipeline(verdict):
    verdict(10, 30)
    system = gen_random_average(7, (3, 3, 3), 6, "1/2")
    ff = FunctionFamily.from_average(system)
    est = level_set_estimate(ff, product_combiner, 8, 8)
    direct = direct_integral(ff, product_combiner)
    for t in itertools.product(range(3), repeat=3):
        assert abs(est.value(t) - direct.value(t)) <= Q(1, 2 ** 8)
        assert direct.value(t) == eval_average(system, t)
    # grid-valued inputs: values in 2^-n Z, products land on the 2^-2n grid
    n = 3
    rng = philox(8)
    parts = tuple(WeightedPart.uniform(range(2)) for _ in range(2))
    om = WeightedPart.uniform(range(4))
    vals = {e: np.vectorize(lambda v: Q(int(v), 2 ** n), otypes=[object])(rng.integers(0, 2 ** n + 1, size=(2, 4)))
            for e in ((0,), (1,))}
    grid = FunctionFamily(2, 1, parts, om, vals)
    est = level_set_estimate(grid, product_combiner, n, 2 * n)
    direct = direct_integral(grid, product_combiner)
    for t in itertools.product(range(2), repeat=2):
        assert est.value(t) == direct.value(t)
