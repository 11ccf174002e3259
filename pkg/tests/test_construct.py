from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from efxlab.core import Allocation, Instance, MonotoneTable
from efxlab.construct import (
    alg1_n_plus_2,
    bobw_lottery,
    cut_and_choose_efx,
    best_cut,
    leximax_cut,
    leximax_cut_efx_plus,
    leximin_key,
    heavy_agent_allocation,
    unenvied_path,
    virtual_split,
    weighted_leximinpp_optimal,
)
from efxlab.enumeration import count_satisfying, iter_allocations, random_additive_instance
from efxlab.fairness import EFX, EFX_PLUS, PO, WEFX, check
from efxlab.fixtures import paper_instance

from .strategies import additive_instances, monotone_tables

B = frozenset


def alloc(*bundles):
    return Allocation(tuple(B(b) for b in bundles))


# ---------------------------------------------------------------------------
# m = n + 2


def test_alg1_diagonal_instance_keeps_own_goods():
    inst = paper_instance("two_extra_goods_n3").instance
    out = alg1_n_plus_2(inst)
    assert check(inst, out, EFX).holds
    assert all(i in out[i] for i in range(3))


@pytest.mark.parametrize("order", [(0, 1), (1, 0)])
def test_alg1_sparse_both_orders(order):
    inst = paper_instance("sparse_efx_n2").instance
    assert check(inst, alg1_n_plus_2(inst, order), EFX).holds


def test_alg1_identical_ones():
    inst = Instance.additive([[1, 1, 1, 1]] * 2)
    out = alg1_n_plus_2(inst)
    assert check(inst, out, EFX).holds
    assert sorted(out.sizes()) == [2, 2]


def test_alg1_rejects_bad_shape():
    with pytest.raises(ValueError, match="n \\+ 2"):
        alg1_n_plus_2(Instance.additive([[1, 1, 1]] * 2))
    with pytest.raises(ValueError, match="permutation"):
        alg1_n_plus_2(Instance.additive([[1] * 4] * 2), order=(0, 0))
    table = MonotoneTable(4, tuple(bin(k).count("1") for k in range(16)))
    with pytest.raises(ValueError, match="additive"):
        alg1_n_plus_2(Instance(2, 4, (table, table)))


def test_virtual_split_values():
    inst = Instance.additive([[5, 1, 3], [0, 2, 2]])
    vs = virtual_split(inst, {0, 1, 2})
    assert vs.s_value == (1, 0)
    assert vs.l_value == (8, 4)


def test_unenvied_path_trivial_and_two_agents():
    inst = Instance.additive([[1, 0], [5, 0]])
    a = alloc({0}, {1})
    assert unenvied_path(inst, a, 1) == [1]
    assert unenvied_path(inst, a, 0) == [0, 1]


def test_unenvied_path_reports_missing_envier():
    inst = Instance.additive([[1, 0], [0, 5]])
    with pytest.raises(ValueError, match="not envied"):
        unenvied_path(inst, alloc({0}, {1}), 0)


def greedy_state(inst):
    pool, bundles = set(range(inst.m)), []
    for i in range(inst.n - 1):
        g = max(sorted(pool), key=lambda h: inst.valuations[i].good(h))
        bundles.append(B({g}))
        pool.discard(g)
    bundles.append(B({min(pool)}))
    return Allocation(tuple(bundles))


@given(additive_instances(n=(2, 5), m=6, hi=20))
def test_unenvied_path_increases(inst):
    a = greedy_state(inst)
    try:
        path = unenvied_path(inst, a, 0)
    except ValueError:
        return
    assert path == sorted(path) and path[-1] == inst.n - 1


@settings(max_examples=80)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_alg1_and_heavy_agent_allocations_are_efx(n, seed):
    inst = random_additive_instance(np.random.default_rng(seed), n, n + 2, value_range=30)
    assert check(inst, alg1_n_plus_2(inst), EFX).holds
    for agent in range(n):
        last = [a for a in range(n) if a != agent] + [agent]
        assert max(alg1_n_plus_2(inst, last).sizes()) >= 2
        out = heavy_agent_allocation(inst, agent)
        assert out.allocated() == inst.goods
        assert check(inst, out, EFX).holds
        assert len(out[agent]) >= 2


# ---------------------------------------------------------------------------
# two agents


def test_cut_even_split():
    inst = Instance.additive([[4, 3, 2, 1], [1, 1, 1, 1]])
    s, t = best_cut(inst, 0)
    assert inst.value(0, s) == inst.value(0, t) == 5
    assert check(inst, cut_and_choose_efx(inst, 0), EFX).holds


def test_cut_single_good():
    inst = Instance.additive([[3], [2]])
    out = cut_and_choose_efx(inst, 0)
    assert out == alloc(set(), {0})
    assert check(inst, out, EFX).holds


def test_cut_identical_three():
    inst = Instance.additive([[1, 1, 1]] * 2)
    out = cut_and_choose_efx(inst)
    assert sorted(out.sizes()) == [1, 2]
    assert check(inst, out, EFX).holds


def test_cut_keeps_worthless_good_on_poor_side():
    # a bare min-gap cut could leave g2, g3 with g1 and break the strong reading
    inst = Instance.additive([[1, 0, 0], [1, 0, 0]])
    assert check(inst, cut_and_choose_efx(inst), EFX).holds


def test_cut_and_choose_needs_two():
    with pytest.raises(ValueError):
        cut_and_choose_efx(Instance.additive([[1]] * 3))


def test_bobw_identical_three():
    inst = Instance.additive([[1, 1, 1]] * 2)
    lot = bobw_lottery(inst)
    assert lot.ex_ante_ef(inst)
    assert lot.expected_value(inst, 0, 0) == lot.expected_value(inst, 1, 1) == Fraction(3, 2)


def test_bobw_no_goods():
    inst = Instance(2, 0, Instance.additive([[], []]).valuations)
    lot = bobw_lottery(inst)
    assert len(lot.entries) == 1 and lot.ex_ante_ef(inst)


TABLE_EXAMPLE = MonotoneTable.from_mapping(3, {0: 0, 1: 1, 2: 2, 4: 3, 6: 4, 3: 5, 5: 6, 7: 7})


def test_leximax_table_example():
    inst = Instance(2, 3, (TABLE_EXAMPLE, TABLE_EXAMPLE))
    low, high = leximax_cut(inst, 0)
    assert (low, high) == (B({0}), B({1, 2}))
    out = leximax_cut_efx_plus(inst)
    assert check(inst, out, EFX_PLUS).holds
    assert not check(inst, out, EFX).holds


def test_leximax_small_cases():
    one = Instance.additive([[2], [1]])
    assert check(one, leximax_cut_efx_plus(one), EFX_PLUS).holds
    four = Instance.additive([[1] * 4] * 2)
    out = leximax_cut_efx_plus(four)
    assert out.sizes() == (2, 2)


@given(additive_instances(n=2, m=(0, 8), hi=9), st.integers(0, 1))
def test_cut_and_choose_efx_and_two_allocations(inst, cutter):
    assert check(inst, cut_and_choose_efx(inst, cutter), EFX).holds
    if 1 <= inst.m <= 6:
        assert count_satisfying(inst, EFX, max_witnesses=0).satisfying >= 2


@given(additive_instances(n=2, m=(0, 7), hi=9))
def test_bobw_ex_ante_ef(inst):
    lot = bobw_lottery(inst)
    assert lot.ex_ante_ef(inst)
    assert all(check(inst, a, EFX).holds for _, a in lot.entries)


@given(st.integers(1, 5).flatmap(lambda m: st.tuples(monotone_tables(m), monotone_tables(m))), st.integers(0, 1))
def test_leximax_efx_plus_and_two_allocations(tables, cutter):
    inst = Instance(2, tables[0].m, tables)
    assert check(inst, leximax_cut_efx_plus(inst, cutter), EFX_PLUS).holds
    assert count_satisfying(inst, EFX_PLUS, max_witnesses=0).satisfying >= 2


# ---------------------------------------------------------------------------
# weighted leximin++


def test_leximin_weighted_ones():
    inst = Instance.additive([[1, 1, 1]] * 2, weights=(1, 2))
    out = weighted_leximinpp_optimal(inst)
    assert out.sizes() == (1, 2)
    assert check(inst, out, WEFX).holds and check(inst, out, PO).holds
    best = max(leximin_key(inst, a) for a in iter_allocations(2, 3))
    assert leximin_key(inst, out) == best


def test_leximin_identical_unit_weights_efx():
    inst = Instance.additive([[3, 1, 4, 1, 5]] * 3, weights=(1, 1, 1))
    assert check(inst, weighted_leximinpp_optimal(inst), EFX).holds


def test_leximin_no_goods_and_no_weights():
    inst = Instance(2, 0, Instance.additive([[], []]).valuations, (1, 1))
    assert weighted_leximinpp_optimal(inst) == Allocation.empty(2)
    with pytest.raises(ValueError):
        weighted_leximinpp_optimal(Instance.additive([[1]]))


@given(additive_instances(n=(1, 3), m=(0, 5), weighted=True, hi=5))
def test_leximin_routes_agree(inst):
    fast = weighted_leximinpp_optimal(inst)
    slow = weighted_leximinpp_optimal(inst, method="generic")
    assert leximin_key(inst, fast) == leximin_key(inst, slow)
    assert fast == slow


@settings(max_examples=150)
@given(additive_instances(n=(1, 4), m=(0, 7), weighted=True, binary=True))
def test_leximin_binary_wefx_po(inst):
    out = weighted_leximinpp_optimal(inst)
    assert check(inst, out, WEFX).holds
    assert check(inst, out, PO).holds
