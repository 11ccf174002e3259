"""Polynomial-time WEFX + PO allocations for binary additive valuations.

Pipeline: drop goods nobody values, sideline agents a maximum matching
leaves empty-handed, then raise a common weighted-utility level ``k``
through the grid ``{j / w_i}`` and freeze each agent's threshold at the
first level it cannot exceed. The final allocation is read off a replica
matching with ``M_i * w_i`` copies of agent ``i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import Additive, Allocation, Instance, classify_valuations


# ---------------------------------------------------------------------------
# matching engine


@dataclass(frozen=True)
class BipartiteGraph:
    left: tuple
    right: tuple
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        edges = frozenset(self.edges)
        lset, rset = set(self.left), set(self.right)
        for a, b in edges:
            if a not in lset or b not in rset:
                raise ValueError(f"edge {(a, b)} not in left x right")
        object.__setattr__(self, "edges", edges)

    def adjacency(self) -> dict:
        pos = {r: k for k, r in enumerate(self.right)}
        adj = {u: [] for u in self.left}
        for a, b in self.edges:
            adj[a].append(b)
        for u in adj:
            adj[u].sort(key=pos.__getitem__)
        return adj


def max_matching_adj(left, adj: dict) -> dict:
    """Maximum-cardinality matching by augmenting paths; returns ``{left: right}``.

    Deterministic: left nodes are processed in the given order and each
    adjacency list in its stored order.
    """
    match_r = {}

    def augment(u, seen):
        for r in adj.get(u, ()):
            if r in seen:
                continue
            seen.add(r)
            if r not in match_r or augment(match_r[r], seen):
                match_r[r] = u
                return True
        return False

    for u in left:
        augment(u, set())
    return {l: r for r, l in match_r.items()}


def max_bipartite_matching(g: BipartiteGraph) -> frozenset:
    return frozenset(max_matching_adj(g.left, g.adjacency()).items())


# ---------------------------------------------------------------------------
# preprocessing


def _require_binary(inst: Instance) -> None:
    if "binary-additive" not in classify_valuations(inst):
        raise ValueError("needs binary additive valuations (every value 0 or 1)")


def _likes(inst: Instance, agent: int, good: int) -> bool:
    return inst.valuations[agent].values[good] == 1


def strip_zero_goods(inst: Instance) -> tuple:
    """``(reduced, zero_goods)``; reduced goods are the valued ones, renumbered in order."""
    _require_binary(inst)
    keep = [g for g in range(inst.m) if any(_likes(inst, i, g) for i in range(inst.n))]
    zero = frozenset(range(inst.m)) - set(keep)
    vals = tuple(Additive(tuple(v.values[g] for g in keep)) for v in inst.valuations)
    return Instance(inst.n, len(keep), vals, inst.weights), zero


def sideline_unmatched_agents(inst: Instance) -> tuple:
    """``(active, sidelined)`` where sidelined agents are left unmatched by a maximum agent-good matching."""
    _require_binary(inst)
    for g in range(inst.m):
        if not any(_likes(inst, i, g) for i in range(inst.n)):
            raise ValueError(f"good {g} is valued by nobody; strip zero goods first")
    adj = {i: [g for g in range(inst.m) if _likes(inst, i, g)] for i in range(inst.n)}
    matched = max_matching_adj(range(inst.n), adj)
    active = frozenset(matched)
    return active, frozenset(range(inst.n)) - active


# ---------------------------------------------------------------------------
# threshold grid


@dataclass(frozen=True)
class ValueGrid:
    """Sorted levels ``{j / w_i : j in 1..m+1}`` preceded by the sentinel ``eps``."""

    elements: tuple
    eps: Fraction

    @classmethod
    def build(cls, weights, m: int) -> "ValueGrid":
        levels = sorted({Fraction(j) / w for w in weights for j in range(1, m + 2)})
        eps = min(levels[0], 1 / max(weights)) / 2
        return cls((eps,) + tuple(levels), eps)

    def succ(self, x: Fraction) -> Optional[Fraction]:
        for y in self.elements:
            if y > x:
                return y
        return None

    def __len__(self) -> int:
        return len(self.elements)


@dataclass
class Trace:
    """Bookkeeping from one pipeline run; used by tests to audit the algorithm."""

    active: frozenset = frozenset()
    sidelined: frozenset = frozenset()
    zero_goods: frozenset = frozenset()
    grid_size: int = 0
    levels_visited: int = 0
    matchings: int = 0
    thresholds: dict = field(default_factory=dict)  # original agent -> M_i
    repairs: int = 0


def _ceil(x: Fraction) -> int:
    return math.ceil(x)


def _replica_matching(inst: Instance, agents, tau: dict, slack_agents, slack: int, trace: Optional[Trace]):
    """Try to saturate every replica ``(i, r)``; slack nodes stand in for the last replica of ``slack_agents``."""
    left, adj = [], {}
    for i in agents:
        liked = [("g", g) for g in range(inst.m) if _likes(inst, i, g)]
        for r in range(1, tau[i] + 1):
            node = (i, r)
            left.append(node)
            extra = [("s", s) for s in range(slack)] if (r == tau[i] and i in slack_agents) else []
            adj[node] = liked + extra
    if trace is not None:
        trace.matchings += 1
    match = max_matching_adj(left, adj)
    return match if len(match) == len(left) else None


def find_minimal(inst: Instance, agents, thresholds: dict, grid: ValueGrid, k: Fraction, trace: Optional[Trace] = None) -> set:
    """Agents whose utility level must freeze at ``k``.

    ``thresholds`` maps finalised agents to their frozen level. Others need
    ``ceil(succ(k) * w_i)`` valued goods unless they are matched to one of
    ``s*`` slack nodes, which is allowed only when ``ceil(k w_i)`` is
    strictly below that. The smallest ``s*`` admitting a saturating matching
    is found by linear scan; agents whose last replica uses a slack node are
    returned.
    """
    ws = inst.weights
    nxt = grid.succ(k)
    if nxt is None:
        raise RuntimeError(f"level {k} is the top of the grid but agents remain unfinalised")
    tau, eligible = {}, set()
    for i in agents:
        if i in thresholds:
            tau[i] = int(thresholds[i] * ws[i])
        else:
            tau[i] = _ceil(nxt * ws[i])
            if _ceil(k * ws[i]) < tau[i]:
                eligible.add(i)
    for slack in range(len(agents) + 1):
        match = _replica_matching(inst, agents, tau, eligible, slack, trace)
        if match is not None:
            return {i for (i, r), node in match.items() if node[0] == "s"}
    raise RuntimeError(f"no saturating matching at level {k} even with {len(agents)} slack nodes")


def _solve_active(inst: Instance, agents: list, trace: Trace) -> dict:
    """Run the level-raising loop on agents that can each get a valued good; returns their bundles."""
    ws = inst.weights
    grid = ValueGrid.build([ws[i] for i in agents], inst.m)
    trace.grid_size = len(grid)
    thresholds = {}
    k = grid.eps
    while len(thresholds) < len(agents):
        trace.levels_visited += 1
        for i in find_minimal(inst, agents, thresholds, grid, k, trace):
            thresholds[i] = k
        if len(thresholds) < len(agents):
            k = grid.succ(k)
    for i, t in thresholds.items():
        if (t * ws[i]).denominator != 1:
            raise AssertionError(f"threshold {t} of agent {i} times its weight is not integral")
    trace.thresholds = dict(thresholds)
    tau = {i: int(thresholds[i] * ws[i]) for i in agents}
    match = _replica_matching(inst, agents, tau, set(), 0, trace)
    if match is None:
        raise RuntimeError("final replica matching failed to saturate")
    bundles = {i: set() for i in agents}
    for (i, _), (_, g) in match.items():
        bundles[i].add(g)
    allocated = set().union(*bundles.values()) if bundles else set()
    for g in range(inst.m):
        if g not in allocated:
            fan = next(i for i in agents if _likes(inst, i, g))
            bundles[fan].add(g)
            trace.repairs += 1
    return bundles


def wefx_po_binary_traced(inst: Instance) -> tuple:
    _require_binary(inst)
    if inst.weights is None:
        raise ValueError("WEFX needs weights")
    trace = Trace()
    reduced, zero = strip_zero_goods(inst)
    kept = [g for g in range(inst.m) if g not in zero]
    trace.zero_goods = zero
    bundles = {i: set() for i in range(inst.n)}
    if reduced.m:
        active, sidelined = sideline_unmatched_agents(reduced)
        trace.active, trace.sidelined = active, sidelined
        solved = _solve_active(reduced, sorted(active), trace)
        for i, b in solved.items():
            bundles[i] = {kept[g] for g in b}
    else:
        trace.sidelined = frozenset(range(inst.n))
    if zero:
        ws = inst.weights
        util = {i: Fraction(sum(inst.valuations[i].values[g] for g in bundles[i])) / ws[i] for i in range(inst.n)}
        poorest = min(range(inst.n), key=lambda i: (util[i], i))
        bundles[poorest] |= set(zero)
    return Allocation(tuple(frozenset(bundles[i]) for i in range(inst.n))), trace


def wefx_po_binary(inst: Instance) -> Allocation:
    return wefx_po_binary_traced(inst)[0]
