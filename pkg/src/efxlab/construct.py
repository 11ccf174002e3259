"""Constructive allocation procedures.

* greedy-pick + virtual-goods algorithm for ``m = n + 2``
* the unenvied-path walk and the structured allocation it yields
* cut-and-choose (min-difference cut) and the best-of-both-worlds lottery
* leximax cut-and-choose for EFX+ under monotone valuations
* brute-force weighted leximin++ optimisation
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Allocation, Instance, from_mask, validate_allocation
from .enumeration import allocation_from_index, iter_allocations, utility_chunks
from .fairness import DEFAULT_CAP, EnvyGraph, envy_graph

_L = -1  # token for the virtual good l


def _argmax_good(values: Callable[[int], Fraction], goods) -> int:
    """Most valued good, lowest index on ties."""
    best = None
    for g in sorted(goods):
        if best is None or values(g) > values(best):
            best = g
    return best


def _top_two(values: Callable[[int], Fraction], goods) -> list:
    ranked = sorted(goods, key=lambda g: (-values(g), g))
    return ranked[:2]


@dataclass(frozen=True)
class VirtualSplit:
    pool: frozenset
    s_value: tuple
    l_value: tuple


def virtual_split(inst: Instance, pool) -> VirtualSplit:
    pool = frozenset(pool)
    s, l = [], []
    for v in inst.valuations:
        small = min(v.good(g) for g in pool)
        s.append(small)
        l.append(v.value(pool) - small)
    return VirtualSplit(pool, tuple(s), tuple(l))


class _TokenState:
    """Single-token holdings where a token is a real good or the virtual good l."""

    def __init__(self, inst: Instance, split: VirtualSplit, holding: dict):
        self.inst, self.split, self.holding = inst, split, dict(holding)

    def util(self, agent: int, token: int) -> Fraction:
        if token == _L:
            return self.split.l_value[agent]
        return self.inst.valuations[agent].good(token)

    def envies(self, i: int, j: int) -> bool:
        return i != j and self.util(i, self.holding[i]) < self.util(i, self.holding[j])

    def graph(self) -> EnvyGraph:
        n = self.inst.n
        return EnvyGraph(n, frozenset((i, j) for i in range(n) for j in range(n) if self.envies(i, j)))

    def eliminate_cycles(self) -> None:
        while True:
            cycle = self.graph().find_cycle()
            if cycle is None:
                return
            old = dict(self.holding)
            for k, agent in enumerate(cycle):
                self.holding[agent] = old[cycle[(k + 1) % len(cycle)]]

    def unenvied(self) -> list:
        envied = self.graph().envied()
        return [a for a in range(self.inst.n) if a not in envied]

    def owner_of_l(self) -> int:
        return next(a for a, t in self.holding.items() if t == _L)

    def finish(self, s_owner: int) -> Allocation:
        """Resolve l and s into real goods of the pool and build the allocation."""
        l_owner = self.owner_of_l()
        pool = self.split.pool
        bundles = {a: {t} for a, t in self.holding.items() if t != _L}
        if s_owner == l_owner:
            bundles[l_owner] = set(pool)
        else:
            v = self.inst.valuations[l_owner]
            two = _top_two(v.good, pool)
            bundles[l_owner] = set(two)
            bundles[s_owner] = bundles[s_owner] | (set(pool) - set(two))
        return Allocation(tuple(frozenset(bundles[a]) for a in range(self.inst.n)))


def _greedy_state(inst: Instance, order: Sequence[int]) -> _TokenState:
    if inst.m != inst.n + 2:
        raise ValueError(f"need m = n + 2, got n={inst.n}, m={inst.m}")
    if not inst.is_additive():
        raise ValueError("virtual goods need additive valuations")
    order = list(order)
    if sorted(order) != list(range(inst.n)):
        raise ValueError(f"order must be a permutation of range({inst.n})")
    pool = set(range(inst.m))
    holding = {}
    for agent in order[:-1]:
        g = _argmax_good(inst.valuations[agent].good, pool)
        holding[agent] = g
        pool.remove(g)
    holding[order[-1]] = _L
    return _TokenState(inst, virtual_split(inst, pool), holding)


def alg1_n_plus_2(inst: Instance, order: Optional[Sequence[int]] = None) -> Allocation:
    """EFX allocation for ``m = n + 2`` additive instances.

    Agents before the last (in ``order``) pick favourite goods; the last
    takes the virtual good l worth the pool minus its cheapest good. After
    envy-cycle elimination the virtual good s goes to the lowest-indexed
    unenvied agent and l/s are resolved into the three pool goods.
    """
    state = _greedy_state(inst, range(inst.n) if order is None else order)
    state.eliminate_cycles()
    return state.finish(min(state.unenvied()))


def _walk(envies: Callable[[int, int], bool], rank: Sequence[int], start: int) -> list:
    """Follow 'lowest-ranked envier' links from ``start`` to the last-ranked agent."""
    last = rank[-1]
    path, k = [start], start
    while k != last:
        nxt = next((j for j in rank if envies(j, k)), None)
        if nxt is None:
            raise ValueError(f"agent {k} is not envied; no path to agent {last}")
        if nxt in path:
            raise ValueError(f"walk revisits agent {nxt}; greedy-pick precondition violated")
        path.append(nxt)
        k = nxt
    return path


def unenvied_path(inst: Instance, alloc: Allocation, start: int) -> list:
    """Path from ``start`` to agent ``n-1`` where each agent envies its predecessor."""
    validate_allocation(inst, alloc)
    g = envy_graph(inst, alloc)
    return _walk(lambda j, k: (j, k) in g.edges, list(range(inst.n)), start)


def heavy_agent_allocation(inst: Instance, agent: int) -> Allocation:
    """EFX allocation (``m = n + 2``) in which ``agent`` holds at least two goods.

    Either ``agent`` receives three goods, or ``agent`` and one other agent
    receive two goods each and one of them holds its favourite good of the
    pair's union.
    """
    rank = [a for a in range(inst.n) if a != agent] + [agent]
    state = _greedy_state(inst, rank)
    free = state.unenvied()
    if agent in free:
        return state.finish(agent)
    if free:
        return state.finish(min(free))
    # every agent is envied: someone prefers l, walk back to `agent` and rotate along the cycle
    start = next(a for a in rank if state.envies(a, agent))
    path = _walk(state.envies, rank, start)
    old = dict(state.holding)
    state.holding[start] = old[agent]
    for k in range(1, len(path)):
        state.holding[path[k]] = old[path[k - 1]]
    return state.finish(agent)


# ---------------------------------------------------------------------------
# two-agent cut-and-choose


def _two_agents(inst: Instance) -> None:
    if inst.n != 2:
        raise ValueError(f"cut-and-choose needs exactly two agents, got n={inst.n}")


def _choose(inst: Instance, chooser: int, a: frozenset, b: frozenset) -> Allocation:
    v = inst.valuations[chooser]
    va, vb = v.value(a), v.value(b)
    if va > vb:
        pick = a
    elif vb > va:
        pick = b
    else:
        pick = b if (0 in b and 0 not in a) else a
    rest = b if pick is a else a
    bundles = [None, None]
    bundles[chooser], bundles[1 - chooser] = pick, rest
    return Allocation(tuple(bundles))


def best_cut(inst: Instance, cutter: int) -> tuple:
    """The cutter's partition minimising the value gap.

    Among minimal gaps the lower-valued side is made as large as possible
    (the two-bundle leximin++ refinement), then the lowest bitmask wins.
    Without that refinement a zero-valued good may be left on the rich side,
    violating the strong EFX reading.
    """
    _two_agents(inst)
    v = inst.valuations[cutter]
    full = (1 << inst.m) - 1
    best = None
    for mask in range(1 << inst.m):
        s, t = from_mask(mask), from_mask(full ^ mask)
        vs, vt = v.value(s), v.value(t)
        low = len(s) if vs < vt else len(t) if vt < vs else min(len(s), len(t))
        key = (abs(vs - vt), -low, mask)
        if best is None or key < best[0]:
            best = (key, s, t)
    return best[1], best[2]


def cut_and_choose_efx(inst: Instance, cutter: int = 0) -> Allocation:
    s, t = best_cut(inst, cutter)
    return _choose(inst, 1 - cutter, s, t)


@dataclass(frozen=True)
class Lottery:
    entries: tuple

    def __post_init__(self):
        probs = [p for p, _ in self.entries]
        if any(p <= 0 for p in probs) or sum(probs) != 1:
            raise ValueError("lottery probabilities must be positive and sum to 1")

    def expected_value(self, inst: Instance, agent: int, bundle_of: int) -> Fraction:
        """Agent ``agent``'s expected value for the bundle of ``bundle_of``."""
        return sum((p * inst.valuations[agent].value(a[bundle_of]) for p, a in self.entries), Fraction(0))

    def ex_ante_ef(self, inst: Instance) -> bool:
        return all(
            self.expected_value(inst, i, i) >= self.expected_value(inst, i, j)
            for i in range(inst.n)
            for j in range(inst.n)
        )


def bobw_lottery(inst: Instance) -> Lottery:
    """Uniform lottery over the two cut-and-choose outcomes (each agent cutting once)."""
    _two_agents(inst)
    if not inst.is_additive():
        raise ValueError("the lottery guarantee needs additive valuations")
    a, b = cut_and_choose_efx(inst, 0), cut_and_choose_efx(inst, 1)
    if a == b:
        return Lottery(((Fraction(1), a),))
    return Lottery(((Fraction(1, 2), a), (Fraction(1, 2), b)))


def leximax_cut(inst: Instance, cutter: int) -> tuple:
    """Return ``(low, high)``: the partition whose high side has least value, then fewest goods."""
    _two_agents(inst)
    v = inst.valuations[cutter]
    full = (1 << inst.m) - 1
    best = None
    for mask in range(1 << inst.m):
        s, t = from_mask(mask), from_mask(full ^ mask)
        vs, vt = v.value(s), v.value(t)
        if vs < vt or (vs == vt and (len(s) > len(t) or (len(s) == len(t) and mask > full ^ mask))):
            low, high, hmask = s, t, full ^ mask
        else:
            low, high, hmask = t, s, mask
        key = (v.value(high), len(high), hmask)
        if best is None or key < best[0]:
            best = (key, low, high)
    return best[1], best[2]


def leximax_cut_efx_plus(inst: Instance, cutter: int = 0) -> Allocation:
    low, high = leximax_cut(inst, cutter)
    return _choose(inst, 1 - cutter, low, high)


# ---------------------------------------------------------------------------
# weighted leximin++


def leximin_key(inst: Instance, alloc: Allocation) -> tuple:
    """Sort key: weighted utilities ascending, then bundle sizes in the same agent order."""
    ws = inst.weights or (Fraction(1),) * inst.n
    pairs = sorted((inst.valuations[i].value(alloc[i]) / ws[i], len(alloc[i])) for i in range(inst.n))
    return tuple(u for u, _ in pairs) + tuple(s for _, s in pairs)


def _lexmax_row(keys: np.ndarray) -> int:
    cand = np.arange(keys.shape[0])
    for col in range(keys.shape[1]):
        colv = keys[cand, col]
        cand = cand[colv == colv.max()]
        if len(cand) == 1:
            break
    return int(cand[0])


def weighted_leximinpp_optimal(inst: Instance, cap: int = DEFAULT_CAP, method: str = "auto") -> Allocation:
    """Brute-force maximal element under the weighted leximin++ order (first by index on ties)."""
    if inst.weights is None:
        raise ValueError("weighted leximin++ needs weights")
    if inst.m == 0:
        return Allocation.empty(inst.n)
    if method != "generic" and inst.is_additive():
        best_key, best_idx = None, None
        for lo, utils, sizes in utility_chunks(inst, weighted=True, cap=cap):
            if utils.dtype == object:
                break
            order = np.lexsort((sizes, utils), axis=1)
            keys = np.concatenate([np.take_along_axis(utils, order, 1), np.take_along_axis(sizes, order, 1)], axis=1)
            r = _lexmax_row(keys)
            key = tuple(int(x) for x in keys[r])
            if best_key is None or key > best_key:
                best_key, best_idx = key, lo + r
        else:
            return allocation_from_index(inst.n, inst.m, best_idx)
    best = None
    for alloc in iter_allocations(inst.n, inst.m, cap=cap):
        key = leximin_key(inst, alloc)
        if best is None or key > best[0]:
            best = (key, alloc)
    return best[1]
