import itertools
from fractions import Fraction as Q

import numpy as np
import pytest

from stabreg.core import ContractError, ParameterError, StructuralError, WeightedPart
from stabreg.generators import (AverageSystem, FunctionFamily, level_set_estimate, direct_integral,
                                discretize_function_family, eval_average, gen_gs_instance,
                                gen_halfsimplex_grid, gen_parity_system, gen_random_average, gs_edge,
                                gs_edge_tensor, halfsimplex_edge, level_set_decompose, philox,
                                product_combiner, random_graph)

from oracles import naive_gs_edge, parity_value


def test_gs_edge_examples():
    assert gs_edge(3, (1, 0), (0, 0), (0, 0))
    assert not gs_edge(3, (0,), (0,), (0,))
    assert gs_edge(3, (0, 1), (0, 1), (0, 2))
    assert not gs_edge(3, (2, 0), (0, 0), (0, 0))
    with pytest.raises(StructuralError):
        gs_edge(3, (0,), (0, 0), (0,))


@pytest.mark.parametrize("n", [1, 2])
def test_gs_instance_matches_oracle_both_routes(n):
    inst = gen_gs_instance(3, n)
    assert [len(p) for p in inst.parts] == [3 ** n] * 3
    E = inst.edge_tensor()
    for i, x in enumerate(inst.parts[0].labels):
        for j, y in enumerate(inst.parts[1].labels):
            for k, z in enumerate(inst.parts[2].labels):
                want = naive_gs_edge(3, x, y, z)
                assert gs_edge(3, x, y, z) == want
                assert bool(E[i, j, k]) == want


def test_gs_instance_gs5_and_empty():
    inst = gen_gs_instance(5, 1)
    E = inst.edge_tensor()
    assert int(E.sum()) == sum(naive_gs_edge(5, (a,), (b,), (c,)) for a, b, c in itertools.product(range(5), repeat=3))
    empty = gen_gs_instance(3, 2, subsets=([], [], []))
    assert empty.edge_tensor().size == 0


def test_gs_instance_weights():
    inst = gen_gs_instance(3, 1, subsets=([(0,), (1,)], None, None), weights=([0, 1], None, None))
    assert inst.parts[0].weights == (0, 1)
    with pytest.raises(StructuralError):
        gen_gs_instance(3, 1, subsets=([(3,)], None, None))


def test_halfsimplex():
    assert not halfsimplex_edge("1/2", "3/10", "1/10")
    assert halfsimplex_edge(1, 1, 1)
    assert halfsimplex_edge(Q(1, 3), Q(1, 3), Q(1, 3))
    with pytest.raises(StructuralError):
        halfsimplex_edge(2, 0, 0)
    H = gen_halfsimplex_grid(5)
    for t in itertools.product(range(5), repeat=3):
        assert bool(H.edges[t]) == halfsimplex_edge(*(H.labels[u][t[u]] for u in range(3)))


def _system(k, d, fam_fn, omega=("a", "b")):
    parts = tuple(WeightedPart.uniform(range(2)) for _ in range(k))
    Om = WeightedPart.uniform(omega)
    families = {}
    for e in itertools.combinations(range(k), d):
        families[e] = {t: frozenset(fam_fn(e, t)) for t in itertools.product(range(2), repeat=d)}
    return AverageSystem(k, d, parts, Om, families)


def test_eval_average_examples():
    full = _system(3, 2, lambda e, t: {"a", "b"})
    assert eval_average(full, (0, 1, 1)) == 1
    hole = _system(3, 2, lambda e, t: set() if (e, t) == ((0, 1), (0, 0)) else {"a", "b"})
    assert eval_average(hole, (0, 0, 1)) == 0
    ex = _system(2, 1, lambda e, t: {"a"} if e == (0,) else {"a", "b"})
    assert eval_average(ex, (0, 1)) == Q(1, 2)
    assert ex.to_function().value((1, 0)) == Q(1, 2)
    with pytest.raises(StructuralError):
        eval_average(ex, (5, 0))


def test_average_system_rejects_missing_entries():
    parts = (WeightedPart.uniform(range(2)),) * 2
    with pytest.raises(StructuralError):
        AverageSystem(2, 1, parts, WeightedPart.uniform("a"), {(0,): {(0,): frozenset()}, (1,): {}})


def test_parity_small_cases():
    parts = [WeightedPart.uniform(range(2)) for _ in range(3)]
    sys_ = gen_parity_system(parts, [(0, 0)], [(0, 0)], [(0, 0)])
    assert eval_average(sys_, (0, 0, 0)) == Q(1, 4)      # three edges
    sys2 = gen_parity_system(parts, [(0, 0)], [(0, 0)], [])
    assert eval_average(sys2, (0, 0, 0)) == 0            # two edges
    assert eval_average(sys2, (1, 1, 1)) == 0            # no edges
    assert eval_average(sys2, (0, 1, 0)) == Q(1, 4)      # one edge


@pytest.mark.parametrize("seed", range(5))
def test_parity_random(seed):
    rng = philox(seed)
    g = [random_graph(rng, 6, 6) for _ in range(3)]
    parts = [WeightedPart.uniform(range(6)) for _ in range(3)]
    sys_ = gen_parity_system(parts, *(np.argwhere(x).tolist() for x in g))
    f = sys_.to_function()
    for i, j, k in itertools.product(range(6), repeat=3):
        assert f.value((i, j, k)) == parity_value(*g, i, j, k)


def test_random_average_contract():
    z = gen_random_average(1, (3, 2), 4, 0, d=1).to_function()
    assert (z.numer == 0).all()
    o = gen_random_average(1, (3, 2), 4, 1, d=1).to_function()
    assert (o.numer == o.denom).all()
    a = gen_random_average(7, (3, 3, 3), 5, "1/2")
    b = gen_random_average(7, (3, 3, 3), 5, "1/2")
    assert a.families == b.families
    with pytest.raises(ParameterError):
        gen_random_average(1, (0, 2), 3, "1/2")


def test_random_average_stream_layout():
    # first block belongs to e = (0,) with shape (|X_0|, |omega|)
    sys_ = gen_random_average(11, (2, 3), 4, "1/3", d=1)
    draws = philox(11).integers(0, 3, size=(2, 4))
    for i in range(2):
        assert sys_.families[(0,)][(i,)] == frozenset(np.flatnonzero(draws[i] < 1).tolist())


def _ff(values_by_e, k=2, d=1, m=3):
    parts = tuple(WeightedPart.uniform(range(2)) for _ in range(k))
    om = WeightedPart.uniform(range(m))
    vals = {e: np.array(v, dtype=object) for e, v in values_by_e.items()}
    return FunctionFamily(k, d, parts, om, vals)


def test_discretize_examples():
    zero = _ff({(0,): [[Q(0)] * 3] * 2, (1,): [[Q(0)] * 3] * 2})
    assert all((lv == 0).all() for lv in discretize_function_family(zero, 3).values())
    half = _ff({(0,): [[Q(1, 2)] * 3] * 2, (1,): [[Q(1, 2)] * 3] * 2})
    assert all((lv == 1).all() for lv in discretize_function_family(half, 1).values())
    p3 = _ff({(0,): [[Q(3, 10)] * 3] * 2, (1,): [[Q(3, 10)] * 3] * 2})
    lv = discretize_function_family(p3, 2)[(0,)]
    assert (lv == 1).all()  # s = 1/4, error 1/20
    with pytest.raises(ParameterError):
        discretize_function_family(p3, 0)


def test_level_decomposition_examples():
    ff = _ff({(0,): [[Q(0), Q(1, 2), Q(1)]] * 2, (1,): [[Q(1), Q(1), Q(0)]] * 2})
    lev = discretize_function_family(ff, 1)
    proj = level_set_decompose(lambda a: a[0], lev, 1, 1, 2, 1)
    assert proj.J == {0: frozenset({(0, 2)}), 1: frozenset({(1, 2)}), 2: frozenset({(2, 0)})}
    zero = level_set_decompose(lambda a: 0, lev, 1, 1, 2, 1)
    assert set(zero.J) == {0}
    ind = _ff({(0,): [[Q(0), Q(1), Q(1)]] * 2, (1,): [[Q(1), Q(1), Q(0)]] * 2})
    prod = level_set_decompose(product_combiner, discretize_function_family(ind, 1), 1, 1, 2, 1)
    # product of indicators: the top level is the intersection of the supports
    assert prod.J == {0: frozenset({(0, 2), (2, 0)}), 2: frozenset({(2, 2)})}
    with pytest.raises(ContractError):
        level_set_decompose(lambda a: 2, lev, 1, 1, 2, 1)


def test_level_set_estimate_indicator_exact():
    sys_ = gen_random_average(3, (3, 3, 3), 6, "1/2")
    ff = FunctionFamily.from_average(sys_)
    est = level_set_estimate(ff, product_combiner, 8, 8)
    f = sys_.to_function()
    assert (est.numer * f.denom == f.numer * est.denom).all()
    direct = direct_integral(ff, product_combiner)
    assert (direct.numer * f.denom == f.numer * direct.denom).all()
