"""Perfect-matching counts recovered from EFX allocation counts.

A bipartite graph on ``n + n`` nodes becomes an additive instance with
``n`` agents: good ``j < n`` is worth 1 to agent ``i`` when ``(i, j)`` is
an edge and 1/2 otherwise, followed by ``k`` goods nobody values. Each
EFX allocation hands the first ``n`` goods out one per agent and the
padding goods only to unenvied agents, so the count is
``sum_i a_i * i**k`` with ``a_n`` the number of perfect matchings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .core import Allocation, Instance
from .enumeration import count_satisfying
from .fairness import DEFAULT_CAP, EFX, envy_graph

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class BipartiteInput:
    n: int
    adjacency: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"side size must be positive, got {self.n}")
        adj = frozenset((int(a), int(b)) for a, b in self.adjacency)
        for a, b in adj:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge {(a, b)} outside [0, {self.n})")
        object.__setattr__(self, "adjacency", adj)

    def isolated_left(self) -> list:
        touched = {a for a, _ in self.adjacency}
        return [i for i in range(self.n) if i not in touched]

    def to_text(self) -> str:
        return "".join(f"{a} {b}\n" for a, b in sorted(self.adjacency))


def parse_graph(text: str, n=None) -> BipartiteInput:
    """Read ``i j`` edge lines (0-based). Side size defaults to one past the largest index."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'i j', got {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node in {line!r}") from None
        if a < 0 or b < 0:
            raise ValueError(f"line {lineno}: negative node index")
        edges.append((a, b))
    if n is None:
        n = 1 + max((max(a, b) for a, b in edges), default=-1)
    return BipartiteInput(n, frozenset(edges))


def min_exponent_k(n: int) -> int:
    """Smallest k with ``n**k > (n-1)**k * n!``."""
    if n < 2:
        raise ValueError(f"needs n >= 2, got {n}")
    fact = math.factorial(n)
    k = 1
    while n**k <= (n - 1) ** k * fact:
        k += 1
    return k


def graph_to_instance(g: BipartiteInput) -> Instance:
    if g.n < 2:
        raise ValueError("the gadget needs n >= 2")
    iso = g.isolated_left()
    if iso:
        raise ValueError(f"left node {iso[0]} has no neighbour; no perfect matching exists")
    k = min_exponent_k(g.n)
    rows = []
    for i in range(g.n):
        row = [Fraction(1) if (i, j) in g.adjacency else HALF for j in range(g.n)]
        rows.append(row + [Fraction(0)] * k)
    return Instance.additive(rows)


def recover_matching_count(g: BipartiteInput, cap: int = DEFAULT_CAP, threads: int = 1) -> int:
    if g.isolated_left():
        return 0
    if g.n == 1:
        return 1
    inst = graph_to_instance(g)
    P = count_satisfying(inst, EFX, cap=cap, threads=threads, max_witnesses=0).satisfying
    return P // g.n ** min_exponent_k(g.n)


def permanent(g: BipartiteInput) -> int:
    """Number of perfect matchings by trying every permutation."""
    return sum(all((i, p[i]) in g.adjacency for i in range(g.n)) for p in permutations(range(g.n)))


def partial_counts(g: BipartiteInput) -> list:
    """``a[i]``: one-good-per-agent EFX allocations of the first n goods with exactly i unenvied agents.

    Allocations giving some agent two of these goods are never EFX (an
    empty-handed agent values every good at least 1/2), so only
    bijections are enumerated.
    """
    inst = graph_to_instance(g)
    a = [0] * (g.n + 1)
    for perm in permutations(range(g.n)):
        bundles = [frozenset({perm[i]}) for i in range(g.n)]
        envied = envy_graph(inst, Allocation(tuple(bundles))).envied()
        a[g.n - len(envied)] += 1
    return a


def decomposed_total(g: BipartiteInput) -> int:
    k = min_exponent_k(g.n)
    return sum(c * i**k for i, c in enumerate(partial_counts(g)))
