"""Named benchmark instances with machine-checkable expectations."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .core import Additive, Allocation, BudgetAdditive, Instance, MonotoneTable, serialize_instance, to_mask
from .enumeration import count_satisfying, iter_allocations
from .fairness import EFX, EFX_PLUS, WEFX, WWEFX, Property, Witness, check, witness_violates
from .wefx_po import wefx_po_binary


@dataclass(frozen=True)
class Expectation:
    kind: str  # exact_count | nonexistence | unique_allocation | table_check
    prop: Property
    value: Optional[int] = None
    allocation: Optional[Allocation] = None
    reference: tuple = ()

    def describe(self) -> str:
        if self.kind == "exact_count":
            return f"{self.value} {self.prop} allocations"
        if self.kind == "nonexistence":
            return f"no {self.prop} allocation"
        if self.kind == "unique_allocation":
            return f"only {self.prop} allocation is {self.allocation}"
        return f"no {self.prop} allocation; {len(self.reference)} witness rows"


@dataclass(frozen=True)
class Fixture:
    id: str
    instance: Instance
    expectation: Expectation
    side_checks: tuple = field(default=())  # (label, bool) facts about the parameters


# ---------------------------------------------------------------------------
# instance builders


def _sparse_tables() -> dict:
    return {
        2: [[1, 0, 0, 0], [1, 0, 0, 0]],
        3: [
            [281, 472, 47, 660, 36],
            [569, 936, 173, 343, 135],
            [522, 641, 52, 793, 571],
        ],
        4: [
            [95, 114, 196, 171, 871, 667],
            [254, 973, 200, 240, 907, 536],
            [3, 910, 444, 627, 730, 693],
            [382, 651, 425, 182, 548, 811],
        ],
    }


def _diagonal(n: int, m: int, own: int, shared: dict) -> Instance:
    rows = []
    for i in range(n):
        row = [0] * m
        row[i] = own
        for g, v in shared.items():
            row[g] = v
        rows.append(row)
    return Instance.additive(rows)


PAIR_CHAINS = (
    ((2, 3), (0, 1), (1, 2), (0, 3), (1, 3), (0, 2)),
    ((0, 3), (1, 2), (0, 1), (1, 3), (2, 3), (0, 2)),
    ((0, 2), (1, 3), (0, 3), (1, 2), (2, 3), (0, 1)),
)


def layered_table(chain) -> MonotoneTable:
    """Values grow with bundle size; pairs take 2..7 in ``chain`` order."""
    pair_value = {to_mask(p): 2 + r for r, p in enumerate(chain)}
    size_value = {0: 0, 1: 1, 3: 8, 4: 9}
    table = {}
    for mask in range(16):
        size = bin(mask).count("1")
        table[mask] = pair_value[mask] if size == 2 else size_value[size]
    return MonotoneTable.from_mapping(4, table)


def ordinal_consistent(table: MonotoneTable, chain) -> list:
    """Problems with a realization: pair chain order and strict size layering."""
    problems = []
    vals = [table.value(p) for p in chain]
    for a, b, va, vb in zip(chain, chain[1:], vals, vals[1:]):
        if not va < vb:
            problems.append(f"pair {a} not below {b}")
    by_size = {}
    for mask in range(1 << table.m):
        by_size.setdefault(bin(mask).count("1"), []).append(table.values[mask])
    for s in range(table.m):
        if max(by_size[s]) >= min(by_size[s + 1]):
            problems.append(f"size {s} bundles not all below size {s + 1}")
    return problems


def _bundles(text: str) -> Allocation:
    # "12|3|4" with 1-based good labels
    return Allocation(tuple(frozenset(int(c) - 1 for c in part) for part in text.split("|")))


# (allocation, envier, envied), agents 1-based
ENVY_ROWS = (
    ("12|3|4", 2, 1), ("12|4|3", 2, 1), ("13|2|4", 2, 1), ("13|4|2", 2, 1),
    ("14|2|3", 3, 1), ("14|3|2", 3, 1), ("23|1|4", 3, 1), ("23|4|1", 3, 1),
    ("24|1|3", 2, 1), ("24|3|1", 2, 1), ("34|1|2", 2, 1), ("34|2|1", 2, 1),
    ("3|12|4", 3, 2), ("4|12|3", 3, 2), ("2|13|4", 1, 2), ("4|13|2", 1, 2),
    ("2|14|3", 1, 2), ("3|14|2", 1, 2), ("1|23|4", 1, 2), ("4|23|1", 1, 2),
    ("1|24|3", 1, 2), ("3|24|1", 1, 2), ("1|34|2", 3, 2), ("2|34|1", 3, 2),
    ("3|4|12", 2, 3), ("4|3|12", 2, 3), ("2|4|13", 1, 3), ("4|2|13", 1, 3),
    ("2|3|14", 1, 3), ("3|2|14", 1, 3), ("1|4|23", 1, 3), ("4|1|23", 1, 3),
    ("1|3|24", 1, 3), ("3|1|24", 1, 3), ("1|2|34", 2, 3), ("2|1|34", 2, 3),
)


def envy_row_holds(inst: Instance, row) -> bool:
    text, envier, envied = row
    alloc = _bundles(text)
    i, j = envier - 1, envied - 1
    return any(witness_violates(inst, alloc, EFX_PLUS, Witness(i, j, g)) for g in sorted(alloc.bundles[j]))


def _build_all() -> dict:
    out = {}

    def add(fx: Fixture):
        out[fx.id] = fx

    for n, rows in _sparse_tables().items():
        add(Fixture(f"sparse_efx_n{n}", Instance.additive(rows), Expectation("exact_count", EFX, n)))
    add(Fixture("all_positive_n3_m2", Instance.additive([[1, 1]] * 3), Expectation("exact_count", EFX, 6)))
    add(Fixture("one_extra_good_n3", _diagonal(3, 4, 2, {3: 1}), Expectation("exact_count", EFX, 3)))
    add(Fixture("two_extra_goods_n3", _diagonal(3, 5, 3, {3: 1, 4: 1}), Expectation("exact_count", EFX, 9)))
    add(Fixture("identical_n3", Instance.additive([[1, 1, 0, 0, 0]] * 3), Expectation("exact_count", EFX, 6)))

    eps = Fraction(1, 10)
    add(
        Fixture(
            "unique_wefx_m3",
            Instance.additive([[1, 1, 1], [1, 0, 0]], weights=(1 - eps, eps)),
            Expectation("unique_allocation", WEFX, allocation=Allocation((frozenset({1, 2}), frozenset({0})))),
        )
    )
    add(
        Fixture(
            "no_wwefx_budget",
            Instance(2, 7, (Additive((1,) * 7), BudgetAdditive((1,) * 7, 2)), (2, 5)),
            Expectation("nonexistence", WWEFX),
        )
    )
    eps = Fraction(1, 20)
    w1, w2 = Fraction(1, 2) + eps, Fraction(1, 2) - eps
    add(
        Fixture(
            "no_wwefx_restricted",
            Instance.additive([[2, 2, 0, 0], [2, 2, 1, 0]], weights=(w1, w2)),
            Expectation("nonexistence", WWEFX),
            side_checks=(
                ("0 < eps < 1/14", 0 < eps < Fraction(1, 14)),
                ("w1/w2 > 1", w1 / w2 > 1),
                ("w2/w1 > 3/4", w2 / w1 > Fraction(3, 4)),
            ),
        )
    )
    tables = tuple(layered_table(c) for c in PAIR_CHAINS)
    add(
        Fixture(
            "no_efx_plus_n3_m4",
            Instance(3, 4, tables),
            Expectation("table_check", EFX_PLUS, reference=ENVY_ROWS),
            side_checks=tuple(
                (f"agent {i} realization consistent", not ordinal_consistent(t, c))
                for i, (t, c) in enumerate(zip(tables, PAIR_CHAINS))
            ),
        )
    )
    return out


_FIXTURES = _build_all()


def fixture_ids() -> list:
    return list(_FIXTURES)


def paper_instance(fixture_id: str) -> Fixture:
    try:
        return _FIXTURES[fixture_id]
    except KeyError:
        raise KeyError(f"unknown fixture {fixture_id!r}; known: {', '.join(_FIXTURES)}") from None


# ---------------------------------------------------------------------------
# suite


@dataclass(frozen=True)
class SuiteRow:
    id: str
    passed: bool
    measured: str
    expected: str

    def to_doc(self) -> dict:
        return {"id": self.id, "pass": self.passed, "measured": self.measured, "expected": self.expected}


def evaluate(fx: Fixture) -> SuiteRow:
    exp, inst = fx.expectation, fx.instance
    side_ok = all(ok for _, ok in fx.side_checks)
    failed_side = [label for label, ok in fx.side_checks if not ok]
    if exp.kind in ("exact_count", "nonexistence"):
        count = count_satisfying(inst, exp.prop, max_witnesses=0).satisfying
        target = exp.value if exp.kind == "exact_count" else 0
        passed, measured = count == target, str(count)
    elif exp.kind == "unique_allocation":
        found = [a for a in iter_allocations(inst.n, inst.m) if check(inst, a, exp.prop).holds]
        solver = wefx_po_binary(inst) if exp.prop == WEFX else None
        passed = found == [exp.allocation] and (solver is None or solver == exp.allocation)
        measured = ", ".join(str(a) for a in found) or "none"
        if solver is not None and solver != exp.allocation:
            measured += f"; solver gave {solver}"
    else:
        count = count_satisfying(inst, exp.prop, max_witnesses=0).satisfying
        rows_ok = sum(envy_row_holds(inst, r) for r in exp.reference)
        passed = count == 0 and rows_ok == len(exp.reference)
        measured = f"{count}; rows {rows_ok}/{len(exp.reference)}"
    if failed_side:
        measured += "; failed: " + ", ".join(failed_side)
    return SuiteRow(fx.id, passed and side_ok, measured, exp.describe())


def verify_paper_suite(ids=None) -> list:
    return [evaluate(paper_instance(i)) for i in (ids or fixture_ids())]


def report_json(rows) -> str:
    return json.dumps([r.to_doc() for r in rows], indent=2)


def report_table(rows) -> str:
    head = ("fixture", "result", "measured", "expected")
    body = [(r.id, "PASS" if r.passed else "FAIL", r.measured, r.expected) for r in rows]
    widths = [max(len(x[c]) for x in [head] + body) for c in range(4)]
    lines = ["  ".join(x[c].ljust(widths[c]) for c in range(4)).rstrip() for x in [head] + body]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def export_fixtures(directory) -> list:
    """Write one instance document per fixture; returns the paths written."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for fid, fx in _FIXTURES.items():
        p = d / f"{fid}.json"
        p.write_text(serialize_instance(fx.instance) + "\n")
        paths.append(p)
    return paths
