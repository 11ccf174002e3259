"""Fairness and efficiency decision procedures.

EFX-style checks use the strong reading: the pivotal good ranges over every
good in the envied bundle, zero-valued ones included.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import Allocation, Instance, classify_valuations, validate_allocation

DEFAULT_CAP = 10**8

_TAGS = ("EF", "EF1", "EFX", "EFXPlus", "PO", "WEF", "WEFX", "WWEFX", "AlphaWEFX")
_WEIGHTED = {"WEF", "WEFX", "WWEFX", "AlphaWEFX"}
_CLI_NAMES = {
    "ef": "EF",
    "ef1": "EF1",
    "efx": "EFX",
    "efx-plus": "EFXPlus",
    "po": "PO",
    "wef": "WEF",
    "wefx": "WEFX",
    "wwefx": "WWEFX",
    "alpha-wefx": "AlphaWEFX",
}


class CapExceeded(RuntimeError):
    """An exhaustive search would exceed the configured enumeration cap."""


@dataclass(frozen=True)
class Property:
    tag: str
    alpha: Optional[Fraction] = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown property {self.tag!r}")
        if self.tag == "AlphaWEFX":
            if self.alpha is None:
                raise ValueError("AlphaWEFX needs alpha")
            alpha = Fraction(self.alpha)
            if not 0 <= alpha <= 1:
                raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
            object.__setattr__(self, "alpha", alpha)
        elif self.alpha is not None:
            raise ValueError(f"{self.tag} takes no alpha")

    @property
    def weighted(self) -> bool:
        return self.tag in _WEIGHTED

    @classmethod
    def parse(cls, name: str, alpha=None) -> "Property":
        try:
            tag = _CLI_NAMES[name.lower()]
        except KeyError:
            raise ValueError(f"unknown property {name!r}; choose from {', '.join(_CLI_NAMES)}") from None
        return cls(tag, Fraction(alpha) if tag == "AlphaWEFX" and alpha is not None else None)

    def __str__(self) -> str:
        return f"{self.alpha}-WEFX" if self.tag == "AlphaWEFX" else self.tag


EF = Property("EF")
EF1 = Property("EF1")
EFX = Property("EFX")
EFX_PLUS = Property("EFXPlus")
PO = Property("PO")
WEF = Property("WEF")
WEFX = Property("WEFX")
WWEFX = Property("WWEFX")


def alpha_wefx(alpha) -> Property:
    return Property("AlphaWEFX", Fraction(alpha))


@dataclass(frozen=True)
class Witness:
    envier: int
    envied: int
    good: Optional[int] = None


@dataclass(frozen=True)
class FairnessReport:
    holds: bool
    witness: Optional[Witness] = None
    dominator: Optional[Allocation] = None

    def __bool__(self) -> bool:
        return self.holds

    def to_doc(self) -> dict:
        doc = {"holds": self.holds}
        if self.witness is not None:
            doc["witness"] = {"envier": self.witness.envier, "envied": self.witness.envied, "good": self.witness.good}
        if self.dominator is not None:
            doc["dominator"] = self.dominator.to_doc()
        return doc


def _pair_violation(inst: Instance, alloc: Allocation, prop: Property, i: int, j: int) -> Optional[Witness]:
    """First violation of ``prop`` by envier ``i`` towards ``j``, scanning goods in index order."""
    v = inst.valuations[i]
    own_bundle, other = alloc.bundles[i], alloc.bundles[j]
    own = v.value(own_bundle)
    tag = prop.tag
    if inst.weights is not None:
        wi, wj = inst.weights[i], inst.weights[j]
    else:
        wi = wj = Fraction(1)

    if tag == "EF":
        return Witness(i, j) if own < v.value(other) else None
    if tag == "WEF":
        return Witness(i, j) if own / wi < v.value(other) / wj else None
    if tag == "EF1":
        if not other or own >= v.value(other):
            return None
        for g in sorted(other):
            if own >= v.value(other - {g}):
                return None
        return Witness(i, j)

    full = v.value(other)
    for g in sorted(other):
        if tag == "EFX":
            ok = own >= v.value(other - {g})
        elif tag == "EFXPlus":
            ok = v.value(own_bundle | {g}) >= full
        elif tag == "WEFX":
            ok = own / wi >= v.value(other - {g}) / wj
        elif tag == "AlphaWEFX":
            ok = own / wi >= prop.alpha * v.value(other - {g}) / wj
        elif tag == "WWEFX":
            ok = own / wi >= v.value(other - {g}) / wj or v.value(own_bundle | {g}) / wi >= full / wj
        else:  # pragma: no cover
            raise AssertionError(tag)
        if not ok:
            return Witness(i, j, g)
    return None


def witness_violates(inst: Instance, alloc: Allocation, prop: Property, witness: Witness) -> bool:
    """Re-evaluate the property's inequality at exactly the witnessed (envier, envied, good)."""
    i, j, g = witness.envier, witness.envied, witness.good
    v = inst.valuations[i]
    A_i, A_j = alloc.bundles[i], alloc.bundles[j]
    own = v.value(A_i)
    wi, wj = (inst.weights[i], inst.weights[j]) if inst.weights else (Fraction(1), Fraction(1))
    tag = prop.tag
    if tag == "EF":
        return own < v.value(A_j)
    if tag == "WEF":
        return own / wi < v.value(A_j) / wj
    if tag == "EF1":
        return bool(A_j) and all(own < v.value(A_j - {h}) for h in A_j)
    if g is None or g not in A_j:
        return False
    if tag == "EFX":
        return own < v.value(A_j - {g})
    if tag == "EFXPlus":
        return v.value(A_i | {g}) < v.value(A_j)
    if tag == "WEFX":
        return own / wi < v.value(A_j - {g}) / wj
    if tag == "AlphaWEFX":
        return own / wi < prop.alpha * v.value(A_j - {g}) / wj
    if tag == "WWEFX":
        return own / wi < v.value(A_j - {g}) / wj and v.value(A_i | {g}) / wi < v.value(A_j) / wj
    return False


def dominates(inst: Instance, other: Allocation, alloc: Allocation) -> bool:
    """True when ``other`` Pareto-dominates ``alloc``."""
    strict = False
    for i in range(inst.n):
        a = inst.valuations[i].value(alloc.bundles[i])
        b = inst.valuations[i].value(other.bundles[i])
        if b < a:
            return False
        strict |= b > a
    return strict


def _po_binary(inst: Instance, alloc: Allocation) -> FairnessReport:
    # sound and complete for binary additive: PO iff every good someone values sits with an agent valuing it
    rows = [v.values for v in inst.valuations]
    owner = alloc.assignment(inst.m)
    for g in range(inst.m):
        holder = owner[g]
        if holder is not None and rows[holder][g] == 1:
            continue
        fans = [j for j in range(inst.n) if rows[j][g] == 1]
        if not fans:
            continue
        bundles = [set(b) for b in alloc.bundles]
        if holder is not None:
            bundles[holder].discard(g)
        bundles[fans[0]].add(g)
        return FairnessReport(False, dominator=Allocation(tuple(bundles)))
    return FairnessReport(True)


def _po_exhaustive(inst: Instance, alloc: Allocation, cap: int) -> FairnessReport:
    from .enumeration import find_dominator

    dom = find_dominator(inst, alloc, cap=cap)
    return FairnessReport(dom is None, dominator=dom)


def check(inst: Instance, alloc: Allocation, prop: Property, cap: int = DEFAULT_CAP, po_method: str = "auto") -> FairnessReport:
    """Decide ``prop`` for ``alloc``; a failing report carries a re-verifiable witness.

    Partial allocations are judged over the allocated goods only. PO is
    decided by exhaustive dominance search, except for binary additive
    instances where the single-good-transfer criterion is exact
    (``po_method="exhaustive"`` forces the search).
    """
    validate_allocation(inst, alloc)
    if prop.weighted and inst.weights is None:
        raise ValueError(f"{prop} needs a weighted instance")
    if prop.tag == "PO":
        if po_method == "auto" and "binary-additive" in classify_valuations(inst):
            return _po_binary(inst, alloc)
        return _po_exhaustive(inst, alloc, cap)
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j:
                continue
            w = _pair_violation(inst, alloc, prop, i, j)
            if w is not None:
                return FairnessReport(False, witness=w)
    return FairnessReport(True)


def holds(inst: Instance, alloc: Allocation, prop: Property, **kw) -> bool:
    return check(inst, alloc, prop, **kw).holds


# ---------------------------------------------------------------------------
# envy graph


@dataclass(frozen=True)
class EnvyGraph:
    n: int
    edges: frozenset

    def successors(self, i: int) -> list:
        return sorted(j for (a, j) in self.edges if a == i)

    def envied(self) -> set:
        return {j for (_, j) in self.edges}

    def find_cycle(self) -> Optional[list]:
        """A cycle ``[c0, c1, ...]`` with ``c_k`` envying ``c_{k+1}``; DFS from the lowest agent index."""
        succ = {i: self.successors(i) for i in range(self.n)}
        state = [0] * self.n  # 0 new, 1 on stack, 2 done
        for root in range(self.n):
            if state[root]:
                continue
            stack = [(root, iter(succ[root]))]
            path = [root]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    stack.pop()
                    path.pop()
                    state[node] = 2
                elif state[nxt] == 1:
                    return path[path.index(nxt):]
                elif state[nxt] == 0:
                    state[nxt] = 1
                    path.append(nxt)
                    stack.append((nxt, iter(succ[nxt])))
        return None


def envy_graph(inst: Instance, alloc: Allocation) -> EnvyGraph:
    validate_allocation(inst, alloc)
    edges = set()
    for i in range(inst.n):
        v = inst.valuations[i]
        own = v.value(alloc.bundles[i])
        for j in range(inst.n):
            if i != j and own < v.value(alloc.bundles[j]):
                edges.add((i, j))
    return EnvyGraph(inst.n, frozenset(edges))


def eliminate_envy_cycles(inst: Instance, alloc: Allocation) -> Allocation:
    """Rotate bundles along envy cycles until the envy graph is acyclic."""
    current = alloc
    while True:
        cycle = envy_graph(inst, current).find_cycle()
        if cycle is None:
            return current
        perm = list(range(inst.n))
        for k, agent in enumerate(cycle):
            perm[agent] = cycle[(k + 1) % len(cycle)]
        current = current.permuted(perm)
