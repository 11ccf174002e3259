"""Instance model shared by every other module.

Values, weights and thresholds are ``fractions.Fraction`` throughout; fairness
decisions never touch floating point. Goods are 0-based indices and a bundle
is a ``frozenset`` of them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Iterable, Optional, Sequence, Union

Bundle = frozenset
RationalLike = Union[int, str, Fraction]

MAX_TABLE_GOODS = 20


class InstanceError(ValueError):
    """Malformed instance document or violated instance invariant."""


class AllocationError(ValueError):
    """Overlapping bundles, out-of-range goods or an incomplete allocation."""


def to_rational(x: RationalLike, path: str = "value") -> Fraction:
    if isinstance(x, bool):
        raise InstanceError(f"{path}: expected a rational, got a boolean")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"{path}: cannot parse rational {x!r}") from exc
    raise InstanceError(f"{path}: expected 'p/q' or integer, got {type(x).__name__}")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_mask(bundle: Iterable[int]) -> int:
    mask = 0
    for g in bundle:
        mask |= 1 << g
    return mask


def from_mask(mask: int) -> frozenset:
    out = []
    g = 0
    while mask:
        if mask & 1:
            out.append(g)
        mask >>= 1
        g += 1
    return frozenset(out)


# ---------------------------------------------------------------------------
# valuations


@dataclass(frozen=True)
class Additive:
    values: tuple

    kind = "additive"

    def __post_init__(self):
        vals = tuple(to_rational(v, f"values[{g}]") for g, v in enumerate(self.values))
        for g, v in enumerate(vals):
            if v < 0:
                raise InstanceError(f"values[{g}]: negative value {v}")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return len(self.values)

    def value(self, bundle: Iterable[int]) -> Fraction:
        vals = self.values
        return sum((vals[g] for g in bundle), Fraction(0))

    def good(self, g: int) -> Fraction:
        return self.values[g]


@dataclass(frozen=True)
class BudgetAdditive:
    values: tuple
    cap: Fraction

    kind = "budget_additive"

    def __post_init__(self):
        vals = tuple(to_rational(v, f"values[{g}]") for g, v in enumerate(self.values))
        for g, v in enumerate(vals):
            if v < 0:
                raise InstanceError(f"values[{g}]: negative value {v}")
        cap = to_rational(self.cap, "cap")
        if cap < 0:
            raise InstanceError(f"cap: negative cap {cap}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "cap", cap)

    @property
    def m(self) -> int:
        return len(self.values)

    def value(self, bundle: Iterable[int]) -> Fraction:
        vals = self.values
        return min(self.cap, sum((vals[g] for g in bundle), Fraction(0)))

    def good(self, g: int) -> Fraction:
        return min(self.cap, self.values[g])


@dataclass(frozen=True)
class MonotoneTable:
    """Explicit value for every subset, indexed by bitmask.

    Monotonicity and ``v(empty) = 0`` are validated on construction.
    """

    m: int
    values: tuple

    kind = "table"

    def __post_init__(self):
        m = self.m
        if not 0 <= m <= MAX_TABLE_GOODS:
            raise InstanceError(f"table valuations support 0 <= m <= {MAX_TABLE_GOODS}, got m={m}")
        if len(self.values) != 1 << m:
            raise InstanceError(f"values: expected {1 << m} subset entries, got {len(self.values)}")
        vals = tuple(to_rational(v, f"values[{mask}]") for mask, v in enumerate(self.values))
        if vals[0] != 0:
            raise InstanceError(f"values[0]: value of the empty bundle must be 0, got {vals[0]}")
        for mask in range(1 << m):
            for g in range(m):
                bit = 1 << g
                if not mask & bit and vals[mask] > vals[mask | bit]:
                    raise InstanceError(
                        f"values[{mask | bit}]: not monotone, v({mask})={vals[mask]} > v({mask | bit})={vals[mask | bit]}"
                    )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_mapping(cls, m: int, table: dict) -> "MonotoneTable":
        """Build from ``{mask: value}``; every one of the 2^m masks must be present."""
        missing = [mask for mask in range(1 << m) if mask not in table]
        if missing:
            raise InstanceError(f"values: table missing subset key {missing[0]}")
        extra = [k for k in table if not 0 <= k < 1 << m]
        if extra:
            raise InstanceError(f"values: subset key {extra[0]} out of range for m={m}")
        return cls(m, tuple(table[mask] for mask in range(1 << m)))

    def value(self, bundle: Iterable[int]) -> Fraction:
        mask = to_mask(bundle)
        if mask >> self.m:
            raise IndexError(f"bundle contains a good outside [0, {self.m})")
        return self.values[mask]

    def good(self, g: int) -> Fraction:
        return self.values[1 << g]


Valuation = Union[Additive, BudgetAdditive, MonotoneTable]


# ---------------------------------------------------------------------------
# instance / allocation


@dataclass(frozen=True)
class Instance:
    n: int
    m: int
    valuations: tuple
    weights: Optional[tuple] = None

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError(f"n: need at least one agent, got {self.n}")
        if self.m < 0:
            raise InstanceError(f"m: negative good count {self.m}")
        vals = tuple(self.valuations)
        if len(vals) != self.n:
            raise InstanceError(f"valuations: expected {self.n} entries, got {len(vals)}")
        for i, v in enumerate(vals):
            if v.m != self.m:
                raise InstanceError(f"valuations[{i}]: defined over {v.m} goods, instance has m={self.m}")
        object.__setattr__(self, "valuations", vals)
        if self.weights is not None:
            ws = tuple(to_rational(w, f"weights[{i}]") for i, w in enumerate(self.weights))
            if len(ws) != self.n:
                raise InstanceError(f"weights: expected {self.n} entries, got {len(ws)}")
            for i, w in enumerate(ws):
                if w <= 0:
                    raise InstanceError(f"weights[{i}]: weights must be strictly positive, got {w}")
            object.__setattr__(self, "weights", ws)

    @classmethod
    def additive(cls, rows: Sequence[Sequence[RationalLike]], weights=None) -> "Instance":
        rows = [tuple(r) for r in rows]
        m = len(rows[0]) if rows else 0
        return cls(len(rows), m, tuple(Additive(r) for r in rows), None if weights is None else tuple(weights))

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    @property
    def goods(self) -> frozenset:
        return frozenset(range(self.m))

    def is_additive(self) -> bool:
        return all(isinstance(v, Additive) for v in self.valuations)

    def value(self, agent: int, bundle: Iterable[int]) -> Fraction:
        return value_of(self, agent, bundle)

    def with_weights(self, weights) -> "Instance":
        return Instance(self.n, self.m, self.valuations, None if weights is None else tuple(weights))


def value_of(inst: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    if not 0 <= agent < inst.n:
        raise IndexError(f"agent {agent} out of range for n={inst.n}")
    bundle = tuple(bundle)
    for g in bundle:
        if not 0 <= g < inst.m:
            raise IndexError(f"good {g} out of range for m={inst.m}")
    return inst.valuations[agent].value(bundle)


@dataclass(frozen=True)
class Allocation:
    bundles: tuple

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(frozenset(b) for b in self.bundles))

    @classmethod
    def from_assignment(cls, n: int, assignment: Sequence[int]) -> "Allocation":
        """``assignment[g]`` is the agent holding good ``g`` (``None`` = unallocated)."""
        bundles = [[] for _ in range(n)]
        for g, agent in enumerate(assignment):
            if agent is not None:
                bundles[agent].append(g)
        return cls(tuple(bundles))

    @classmethod
    def empty(cls, n: int) -> "Allocation":
        return cls(tuple(frozenset() for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def __getitem__(self, agent: int) -> frozenset:
        return self.bundles[agent]

    def allocated(self) -> frozenset:
        return frozenset().union(*self.bundles) if self.bundles else frozenset()

    def owner(self, good: int) -> Optional[int]:
        for i, b in enumerate(self.bundles):
            if good in b:
                return i
        return None

    def assignment(self, m: int) -> tuple:
        out = [None] * m
        for i, b in enumerate(self.bundles):
            for g in b:
                out[g] = i
        return tuple(out)

    def sizes(self) -> tuple:
        return tuple(len(b) for b in self.bundles)

    def permuted(self, perm: Sequence[int]) -> "Allocation":
        """Agent ``i`` receives the bundle currently held by ``perm[i]``."""
        return Allocation(tuple(self.bundles[p] for p in perm))

    def to_doc(self) -> dict:
        return {"bundles": [sorted(b) for b in self.bundles]}

    def __str__(self) -> str:
        parts = ("{" + ",".join(f"g{g + 1}" for g in sorted(b)) + "}" for b in self.bundles)
        return "(" + ", ".join(parts) + ")"


def validate_allocation(inst: Instance, alloc: Allocation, require_complete: bool = False) -> None:
    if alloc.n != inst.n:
        raise AllocationError(f"allocation has {alloc.n} bundles, instance has n={inst.n}")
    seen = {}
    for i, b in enumerate(alloc.bundles):
        for g in b:
            if not 0 <= g < inst.m:
                raise AllocationError(f"bundle {i}: good {g} out of range for m={inst.m}")
            if g in seen:
                raise AllocationError(f"good {g} allocated to both agent {seen[g]} and agent {i}")
            seen[g] = i
    if require_complete and len(seen) != inst.m:
        missing = min(set(range(inst.m)) - set(seen))
        raise AllocationError(f"good {missing} is unallocated")


# ---------------------------------------------------------------------------
# valuation classes


def _zero_one(values) -> bool:
    return all(v in (0, 1) for v in values)


def classify_valuations(inst: Instance) -> set:
    vals = inst.valuations
    tags = set()
    additive = all(isinstance(v, Additive) for v in vals)
    if additive:
        tags.add("additive")
        if all(_zero_one(v.values) for v in vals):
            tags.add("binary-additive")
        restricted = True
        for g in range(inst.m):
            nonzero = {v.values[g] for v in vals if v.values[g] != 0}
            if len(nonzero) > 1:
                restricted = False
                break
        if restricted:
            tags.add("restricted-additive")
    if len(set(vals)) == 1:
        tags.add("identical")
    if all(
        (isinstance(v, Additive) and _zero_one(v.values))
        or (isinstance(v, BudgetAdditive) and _zero_one(v.values) and v.cap.denominator == 1)
        for v in vals
    ):
        tags.add("binary-submodular-known")
    return tags


def is_binary_additive(inst: Instance) -> bool:
    return "binary-additive" in classify_valuations(inst)


def integer_scale(inst: Instance) -> tuple:
    """Per-agent integer value rows with a common scale factor.

    A single multiplier is used for every agent, so cross-agent utility
    comparisons (leximin, weighted checks) stay exact. Only additive instances.
    """
    den = 1
    for v in inst.valuations:
        for x in v.values:
            den = lcm(den, x.denominator)
    rows = [[int(x * den) for x in v.values] for v in inst.valuations]
    return rows, den


def integer_weights(inst: Instance) -> list:
    """Weights scaled by one common factor to positive integers."""
    if inst.weights is None:
        return [1] * inst.n
    den = 1
    for w in inst.weights:
        den = lcm(den, w.denominator)
    return [int(w * den) for w in inst.weights]


# ---------------------------------------------------------------------------
# documents


def instance_to_doc(inst: Instance) -> dict:
    vals = []
    for v in inst.valuations:
        if isinstance(v, Additive):
            vals.append({"kind": "additive", "values": [format_rational(x) for x in v.values]})
        elif isinstance(v, BudgetAdditive):
            vals.append(
                {
                    "kind": "budget_additive",
                    "values": [format_rational(x) for x in v.values],
                    "cap": format_rational(v.cap),
                }
            )
        else:
            vals.append({"kind": "table", "values": {str(k): format_rational(x) for k, x in enumerate(v.values)}})
    return {
        "n": inst.n,
        "m": inst.m,
        "weights": None if inst.weights is None else [format_rational(w) for w in inst.weights],
        "valuations": vals,
    }


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_doc(inst), indent=2)


def _expect(cond, path, msg):
    if not cond:
        raise InstanceError(f"{path}: {msg}")


def instance_from_doc(doc) -> Instance:
    _expect(isinstance(doc, dict), "$", "instance document must be a JSON object")
    for key in ("n", "m", "valuations"):
        _expect(key in doc, key, "missing field")
    n, m = doc["n"], doc["m"]
    _expect(isinstance(n, int) and not isinstance(n, bool), "n", "must be an integer")
    _expect(isinstance(m, int) and not isinstance(m, bool), "m", "must be an integer")
    raw = doc["valuations"]
    _expect(isinstance(raw, list), "valuations", "must be a list")
    vals = []
    for i, entry in enumerate(raw):
        path = f"valuations[{i}]"
        _expect(isinstance(entry, dict), path, "must be an object")
        kind = entry.get("kind")
        try:
            if kind == "additive":
                _expect(isinstance(entry.get("values"), list), path + ".values", "must be a list")
                vals.append(Additive(tuple(entry["values"])))
            elif kind == "budget_additive":
                _expect(isinstance(entry.get("values"), list), path + ".values", "must be a list")
                _expect("cap" in entry, path + ".cap", "missing field")
                vals.append(BudgetAdditive(tuple(entry["values"]), entry["cap"]))
            elif kind == "table":
                table = entry.get("values")
                _expect(isinstance(table, dict), path + ".values", "must be an object keyed by bitmask")
                parsed = {}
                for k, x in table.items():
                    try:
                        parsed[int(k)] = x
                    except ValueError as exc:
                        raise InstanceError(f"{path}.values: bad bitmask key {k!r}") from exc
                vals.append(MonotoneTable.from_mapping(m, parsed))
            else:
                raise InstanceError(f"{path}.kind: unknown valuation kind {kind!r}")
        except InstanceError as exc:
            msg = str(exc)
            raise InstanceError(msg if msg.startswith(path) else f"{path}.{msg}") from exc
    weights = doc.get("weights")
    if weights is not None:
        _expect(isinstance(weights, list), "weights", "must be a list or null")
    return Instance(n, m, tuple(vals), None if weights is None else tuple(weights))


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"$: malformed JSON ({exc})") from exc
    return instance_from_doc(doc)


def parse_allocation(text: str, inst: Optional[Instance] = None, require_complete: bool = False) -> Allocation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AllocationError(f"malformed JSON ({exc})") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("bundles"), list):
        raise AllocationError("allocation document needs a 'bundles' list")
    bundles = []
    for i, b in enumerate(doc["bundles"]):
        if not isinstance(b, list) or not all(isinstance(g, int) and not isinstance(g, bool) for g in b):
            raise AllocationError(f"bundles[{i}]: must be a list of good indices")
        if len(set(b)) != len(b):
            raise AllocationError(f"bundles[{i}]: duplicate good")
        bundles.append(frozenset(b))
    alloc = Allocation(tuple(bundles))
    if inst is not None:
        validate_allocation(inst, alloc, require_complete)
    return alloc


def serialize_allocation(alloc: Allocation) -> str:
    return json.dumps(alloc.to_doc())


def subsets(goods: Sequence[int]):
    """All subsets of ``goods`` by increasing size."""
    goods = list(goods)
    for r in range(len(goods) + 1):
        for c in combinations(goods, r):
            yield frozenset(c)
