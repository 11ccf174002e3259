import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from efxlab.core import Allocation, Instance
from efxlab.enumeration import (
    allocation_from_index,
    allocation_index,
    build_join_graph,
    count_satisfying,
    criterion_holds,
    find_dominator,
    iter_allocations,
    min_count_search,
    random_additive_instance,
    split_ranges,
)
from efxlab.fairness import EF, EF1, EFX, EFX_PLUS, WEF, WEFX, WWEFX, CapExceeded, alpha_wefx, check, dominates
from efxlab.fixtures import paper_instance

from .strategies import additive_instances


def brute_count(inst, prop):
    return sum(check(inst, a, prop).holds for a in iter_allocations(inst.n, inst.m))


@pytest.mark.parametrize("n, m, total", [(2, 2, 4), (3, 5, 243), (1, 3, 1), (3, 0, 1)])
def test_iter_allocations_total(n, m, total):
    seen = list(iter_allocations(n, m))
    assert len(seen) == total == len(set(seen))
    assert all(a.allocated() == frozenset(range(m)) for a in seen)


def test_index_encoding():
    # good g goes to agent (idx // n**g) % n
    a = allocation_from_index(3, 3, 5)  # digits (2, 1, 0)
    assert a == Allocation((frozenset({2}), frozenset({1}), frozenset({0})))
    assert allocation_index(a, 3) == 5


def test_cap():
    with pytest.raises(CapExceeded):
        list(iter_allocations(4, 6, cap=100))
    with pytest.raises(CapExceeded):
        count_satisfying(paper_instance("sparse_efx_n4").instance, EFX, cap=4095)
    assert count_satisfying(paper_instance("sparse_efx_n4").instance, EFX, cap=4096).satisfying == 4


@pytest.mark.parametrize(
    "fid, prop, expected",
    [
        ("sparse_efx_n2", EFX, 2),
        ("sparse_efx_n3", EFX, 3),
        ("sparse_efx_n4", EFX, 4),
        ("one_extra_good_n3", EFX, 3),
        ("two_extra_goods_n3", EFX, 9),
        ("identical_n3", EFX, 6),
        ("all_positive_n3_m2", EFX, 6),
        ("no_wwefx_budget", WWEFX, 0),
        ("no_wwefx_restricted", WWEFX, 0),
        ("no_efx_plus_n3_m4", EFX_PLUS, 0),
    ],
)
@pytest.mark.parametrize("method", ["auto", "generic"])
def test_fixture_counts(fid, prop, expected, method):
    inst = paper_instance(fid).instance
    res = count_satisfying(inst, prop, method=method)
    assert res.satisfying == expected
    assert res.total_checked == inst.n**inst.m
    for w in res.witnesses:
        assert check(inst, w, prop).holds


def test_sparse_n2_witnesses_are_exact():
    res = count_satisfying(paper_instance("sparse_efx_n2").instance, EFX)
    assert set(map(str, res.witnesses)) == {"({g1}, {g2,g3,g4})", "({g2,g3,g4}, {g1})"}


def test_weighted_count_needs_weights():
    with pytest.raises(ValueError):
        count_satisfying(Instance.additive([[1], [1]]), WEFX)


def test_split_ranges_cover():
    parts = split_ranges(10, 3)
    assert parts[0][0] == 0 and parts[-1][1] == 10
    assert all(a[1] == b[0] for a, b in zip(parts, parts[1:]))


def test_parallel_matches_serial():
    inst = paper_instance("sparse_efx_n4").instance
    serial = count_satisfying(inst, EFX)
    par = count_satisfying(inst, EFX, threads=3)
    assert (par.satisfying, par.total_checked) == (serial.satisfying, serial.total_checked)
    assert par.witnesses == serial.witnesses


def test_find_dominator():
    inst = Instance.additive([[1, 0], [0, 1]])
    bad = Allocation((frozenset({1}), frozenset({0})))
    dom = find_dominator(inst, bad)
    assert dominates(inst, dom, bad)
    assert find_dominator(inst, Allocation((frozenset({0}), frozenset({1})))) is None


# ---------------------------------------------------------------------------
# join graph


def test_join_graph_sparse_n3():
    jg = build_join_graph(paper_instance("sparse_efx_n3").instance)
    assert jg.edges == {(2, 0), (2, 1), (2, 2)}
    for comp_agents, comp_edges in jg.components():
        assert len(comp_edges) >= len(comp_agents)


def test_join_graph_self_loop_when_one_good_matters():
    inst = Instance.additive([[1, 0, 0, 0]] * 2)
    jg = build_join_graph(inst)
    loops = [e for e in jg.edges if e[0] == e[1]]
    assert loops
    for e in loops:
        assert criterion_holds(inst, e, jg.edge_witness[e])


def test_join_graph_needs_n_plus_2():
    with pytest.raises(ValueError):
        build_join_graph(Instance.additive([[1, 1, 1]] * 2))


@settings(max_examples=60)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_join_graph_components_have_enough_edges(n, seed):
    inst = random_additive_instance(np.random.default_rng(seed), n, n + 2, value_range=20)
    jg = build_join_graph(inst)
    assert jg.edges
    for agents, edges in jg.components():
        assert len(edges) >= len(agents)
    for e, w in jg.edge_witness.items():
        assert criterion_holds(inst, e, w)


# ---------------------------------------------------------------------------
# search


@pytest.mark.parametrize("n, m, floor", [(2, 4, 2), (2, 2, 2), (3, 5, 3)])
def test_min_count_search_floor(n, m, floor):
    res = min_count_search(n, m, EFX, samples=40, seed=7)
    assert res.min_count >= floor
    assert count_satisfying(res.instance, EFX).satisfying == res.min_count


def test_min_count_search_deterministic():
    a = min_count_search(3, 5, samples=10, seed=3)
    b = min_count_search(3, 5, samples=10, seed=3)
    assert a == b
    assert a.to_doc()["seed"] == 3


# ---------------------------------------------------------------------------
# properties


ALL_PROPS = [EF, EF1, EFX, EFX_PLUS, WEF, WEFX, WWEFX, alpha_wefx("1/3")]


@given(additive_instances(n=(1, 3), m=(0, 5), weighted=True, hi=9), st.sampled_from(ALL_PROPS))
def test_vector_route_matches_checker(inst, prop):
    fast = count_satisfying(inst, prop, max_witnesses=0).satisfying
    assert fast == brute_count(inst, prop)


@given(additive_instances(n=(1, 3), m=(0, 6)), st.data())
def test_split_counts_sum(inst, data):
    total = inst.n**inst.m
    cut = data.draw(st.integers(0, total))
    left = count_satisfying(inst, EFX, stop=cut).satisfying
    right = count_satisfying(inst, EFX, start=cut).satisfying
    assert left + right == count_satisfying(inst, EFX).satisfying


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))), st.data())
def test_positive_few_goods_count(nm, data):
    n, m = nm
    rows = [[data.draw(st.integers(1, 9)) for _ in range(m)] for _ in range(n)]
    inst = Instance.additive(rows)
    assert count_satisfying(inst, EFX).satisfying == math.factorial(n) // math.factorial(n - m)


@settings(max_examples=40)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_at_least_n_efx_when_two_extra_goods(n, seed):
    inst = random_additive_instance(np.random.default_rng(seed), n, n + 2, value_range=50)
    assert count_satisfying(inst, EFX, max_witnesses=0).satisfying >= n
