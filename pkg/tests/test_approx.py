from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from efxlab.approx import QUARTER, f_value, maximize_f, normalize_two_agent, quarter_wefx, quarter_wefx_stats
from efxlab.core import Instance, from_mask
from efxlab.fairness import WEFX, check

from .strategies import additive_instances

F = Fraction


@st.composite
def two_agent(draw, m=(1, 8)):
    inst = draw(additive_instances(n=2, m=m, weighted=True, hi=12))
    assume(all(sum(v.values) > 0 for v in inst.valuations))
    return inst


def test_normalize():
    inst = Instance.additive([[4, 3, 2, 1], [1, 1, 1, 1]], weights=(2, 5))
    norm = normalize_two_agent(inst)
    assert norm.weights == (F(2, 7), F(5, 7))
    assert norm.valuations[0].values == (F(2, 5), F(3, 10), F(1, 5), F(1, 10))
    assert normalize_two_agent(norm) == norm


def test_normalize_errors():
    with pytest.raises(ValueError, match="zero"):
        normalize_two_agent(Instance.additive([[0, 0], [1, 1]], weights=(1, 1)))
    with pytest.raises(ValueError, match="weights"):
        normalize_two_agent(Instance.additive([[1], [1]]))
    with pytest.raises(ValueError, match="two agents"):
        normalize_two_agent(Instance.additive([[1]] * 3, weights=(1, 1, 1)))


def test_f_exact_split():
    row = [F(1, 2), F(3, 10), F(1, 5)]
    inst = Instance.additive([row, row], weights=(F(1, 2), F(1, 2)))
    assert f_value(inst, {0}) == 0
    best = maximize_f(inst)
    assert best.f_value == 0
    # {g2, g3} ties with {g1} and wins on size
    assert best.subset == {1, 2}


def test_f_single_good():
    inst = Instance.additive([[1], [1]], weights=(F(1, 2), F(1, 2)))
    assert maximize_f(inst).f_value == F(-1, 2)


def test_quarter_single_good():
    inst = Instance.additive([[3], [7]], weights=(1, 9))
    assert check(inst, quarter_wefx(inst), QUARTER).holds


@given(two_agent())
def test_maximize_f_is_lexicographic_max(inst):
    norm = normalize_two_agent(inst)
    best = maximize_f(norm)
    assert best.f_value == f_value(norm, best.subset)
    assert best.f_value >= -norm.weights[0]
    keys = [(f_value(norm, from_mask(k)), len(from_mask(k)), -k) for k in range(1 << norm.m)]
    top = max(keys)
    assert (best.f_value, best.cardinality) == top[:2]
    assert best.subset == from_mask(-top[2])


@given(two_agent())
def test_exchange_bounds(inst):
    norm = normalize_two_agent(inst)
    A = maximize_f(norm).subset
    (v1, v2), (w1, w2) = norm.valuations, norm.weights
    for g in norm.goods - A:
        if v1.good(g) > v2.good(g):
            assert v1.value(A) + v1.good(g) >= w1
            assert min(w1 - v1.value(A), v1.good(g)) <= w2


@settings(max_examples=300)
@given(two_agent(m=(1, 10)))
def test_quarter_wefx(inst):
    out, stats = quarter_wefx_stats(inst)
    assert out.allocated() == inst.goods
    assert check(inst, out, QUARTER).holds
    assert not stats.fallback_used
    if stats.case == "exact":
        assert check(inst, out, WEFX).holds
