"""Exhaustive enumeration of complete allocations, counting and join graphs.

Allocation index ``idx`` in ``[0, n**m)`` assigns good ``g`` to agent
``(idx // n**g) % n``, so any index range can be processed independently and
results merged in range order.

Additive instances are counted by a vectorised integer kernel; everything
else (and ``method="generic"``) goes through :func:`efxlab.fairness.check`
one allocation at a time.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .core import Allocation, Instance, integer_scale, integer_weights
from .fairness import DEFAULT_CAP, EFX, CapExceeded, Property, check, dominates

CHUNK = 1 << 15
_INT64_SAFE = 1 << 62


def _require_cap(n: int, m: int, cap: int) -> int:
    if n < 1 or m < 0:
        raise ValueError(f"need n >= 1 and m >= 0, got n={n}, m={m}")
    total = n**m
    if total > cap:
        raise CapExceeded(f"{n}^{m} = {total} allocations exceeds the enumeration cap {cap}")
    return total


def allocation_from_index(n: int, m: int, idx: int) -> Allocation:
    bundles = [[] for _ in range(n)]
    for g in range(m):
        idx, agent = divmod(idx, n)
        bundles[agent].append(g)
    return Allocation(tuple(bundles))


def allocation_index(alloc: Allocation, m: int) -> int:
    n = alloc.n
    idx = 0
    for g, agent in enumerate(alloc.assignment(m)):
        if agent is None:
            raise ValueError("only complete allocations have an index")
        idx += agent * n**g
    return idx


def iter_allocations(n: int, m: int, start: int = 0, stop: Optional[int] = None, cap: int = DEFAULT_CAP) -> Iterator[Allocation]:
    total = _require_cap(n, m, cap)
    stop = total if stop is None else min(stop, total)
    for idx in range(start, stop):
        yield allocation_from_index(n, m, idx)


def split_ranges(total: int, parts: int) -> list:
    parts = max(1, min(parts, total)) if total else 1
    step = -(-total // parts) if total else 0
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)] if total else [(0, 0)]


def _assignments(n: int, m: int, lo: int, hi: int) -> np.ndarray:
    idx = np.arange(lo, hi, dtype=np.int64)
    powers = n ** np.arange(m, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % n


# ---------------------------------------------------------------------------
# vectorised kernel for additive valuations


class _AdditiveKernel:
    def __init__(self, inst: Instance, prop: Property):
        self.inst, self.prop = inst, prop
        rows, _ = integer_scale(inst)
        ws = integer_weights(inst) if prop.weighted else [1] * inst.n
        anum, aden = (prop.alpha.numerator, prop.alpha.denominator) if prop.tag == "AlphaWEFX" else (1, 1)
        bound = (max((sum(r) for r in rows), default=0) + 1) * max(ws) * max(anum, aden) * 4
        self.dtype = np.int64 if bound < _INT64_SAFE else object
        self.rows = [np.array(r, dtype=self.dtype) for r in rows]
        self.ws, self.anum, self.aden = ws, anum, aden

    def satisfied(self, assign: np.ndarray) -> np.ndarray:
        n, tag = self.inst.n, self.prop.tag
        if self.inst.m == 0:
            return np.ones(assign.shape[0], dtype=bool)
        masks = [assign == j for j in range(n)]
        ok = np.ones(assign.shape[0], dtype=bool)
        for i in range(n):
            a = self.rows[i]
            zero = np.zeros((), dtype=self.dtype) if self.dtype is not object else 0
            own = np.where(masks[i], a, zero).sum(axis=1)
            for j in range(n):
                if i == j:
                    continue
                mj = masks[j]
                vals = np.where(mj, a, zero).sum(axis=1)
                nonempty = mj.any(axis=1)
                wi, wj = self.ws[i], self.ws[j]
                if tag == "EF":
                    cond = own >= vals
                elif tag == "WEF":
                    cond = own * wj >= vals * wi
                elif tag == "EF1":
                    mx = np.where(mj, a, zero).max(axis=1)
                    cond = own >= vals - mx
                else:
                    big = a.max() + 1 if len(a) else 1
                    mn = np.where(mj, a, big).min(axis=1)
                    mn = np.where(nonempty, mn, zero)
                    if tag in ("EFX", "EFXPlus"):
                        cond = own >= vals - mn
                    elif tag == "WEFX":
                        cond = own * wj >= (vals - mn) * wi
                    elif tag == "AlphaWEFX":
                        cond = own * wj * self.aden >= (vals - mn) * wi * self.anum
                    elif tag == "WWEFX":
                        # both disjuncts are monotone in the pivotal good's value: the cheapest good binds
                        cond = (own * wj >= (vals - mn) * wi) | ((own + mn) * wj >= vals * wi)
                    else:  # pragma: no cover
                        raise AssertionError(tag)
                    cond = cond | ~nonempty
                ok &= np.asarray(cond, dtype=bool)
        return ok


def _kernel_for(inst: Instance, prop: Property, method: str):
    if method == "generic":
        return None
    if prop.tag != "PO" and inst.is_additive():
        return _AdditiveKernel(inst, prop)
    if method == "vector":
        raise ValueError(f"no vectorised kernel for {prop} on this instance")
    return None


def satisfying_indices(inst: Instance, prop: Property, start: int = 0, stop: Optional[int] = None, cap: int = DEFAULT_CAP, method: str = "auto") -> Iterator[int]:
    """Indices of complete allocations in ``[start, stop)`` satisfying ``prop``, ascending."""
    if prop.weighted and inst.weights is None:
        raise ValueError(f"{prop} needs a weighted instance")
    total = _require_cap(inst.n, inst.m, cap)
    stop = total if stop is None else min(stop, total)
    kernel = _kernel_for(inst, prop, method)
    if kernel is None:
        for idx in range(start, stop):
            if check(inst, allocation_from_index(inst.n, inst.m, idx), prop, cap=cap).holds:
                yield idx
        return
    for lo in range(start, stop, CHUNK):
        hi = min(lo + CHUNK, stop)
        ok = kernel.satisfied(_assignments(inst.n, inst.m, lo, hi))
        for k in np.flatnonzero(ok):
            yield lo + int(k)


@dataclass(frozen=True)
class CountResult:
    total_checked: int
    satisfying: int
    witnesses: tuple = field(default=(), compare=False)

    def merge(self, other: "CountResult", max_witnesses: int) -> "CountResult":
        wit = (self.witnesses + other.witnesses)[:max_witnesses]
        return CountResult(self.total_checked + other.total_checked, self.satisfying + other.satisfying, wit)


def _count_range(args) -> CountResult:
    inst, prop, lo, hi, cap, max_witnesses, method = args
    if method != "generic" and _kernel_for(inst, prop, method) is not None and max_witnesses == 0:
        kernel = _AdditiveKernel(inst, prop)
        count = 0
        for a in range(lo, hi, CHUNK):
            b = min(a + CHUNK, hi)
            count += int(kernel.satisfied(_assignments(inst.n, inst.m, a, b)).sum())
        return CountResult(hi - lo, count)
    count, wit = 0, []
    for idx in satisfying_indices(inst, prop, lo, hi, cap, method):
        count += 1
        if len(wit) < max_witnesses:
            wit.append(allocation_from_index(inst.n, inst.m, idx))
    return CountResult(hi - lo, count, tuple(wit))


def count_satisfying(
    inst: Instance,
    prop: Property,
    start: int = 0,
    stop: Optional[int] = None,
    cap: int = DEFAULT_CAP,
    max_witnesses: int = 16,
    method: str = "auto",
    threads: int = 1,
    executor=None,
) -> CountResult:
    """Count complete allocations satisfying ``prop`` over an index range (default: all ``n**m``).

    With ``threads > 1`` the range is split into contiguous parts counted in
    worker processes (``executor`` if given, else a fresh pool) and merged in
    range order, so witnesses match a serial run.
    """
    if prop.weighted and inst.weights is None:
        raise ValueError(f"{prop} needs a weighted instance")
    total = _require_cap(inst.n, inst.m, cap)
    stop = total if stop is None else min(stop, total)
    span = max(0, stop - start)
    if threads <= 1 or span < 2:
        return _count_range((inst, prop, start, stop, cap, max_witnesses, method))
    ranges = [(start + lo, start + hi) for lo, hi in split_ranges(span, threads)]
    jobs = [(inst, prop, lo, hi, cap, max_witnesses, method) for lo, hi in ranges]
    result = CountResult(0, 0)
    if executor is not None:
        parts = list(executor.map(_count_range, jobs))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_count_range, jobs))
    for part in parts:
        result = result.merge(part, max_witnesses)
    return result


# ---------------------------------------------------------------------------
# utilities over all allocations (PO, leximin)


def utility_chunks(inst: Instance, weighted: bool = False, cap: int = DEFAULT_CAP):
    """Yield ``(lo, utils, sizes)`` for every chunk of allocation indices.

    ``utils[r, i]`` is agent ``i``'s value for its own bundle, scaled by one
    common positive integer (divided by its weight when ``weighted``), so
    row-wise and cross-agent comparisons are exact. Additive instances only.
    """
    total = _require_cap(inst.n, inst.m, cap)
    rows, _ = integer_scale(inst)
    mult = [1] * inst.n
    if weighted:
        ws = integer_weights(inst)
        big = math.lcm(*ws)
        mult = [big // w for w in ws]
    bound = (max((sum(r) for r in rows), default=0) + 1) * max(mult)
    dtype = np.int64 if bound < _INT64_SAFE else object
    scaled = [np.array([x * mult[i] for x in rows[i]], dtype=dtype) for i in range(inst.n)]
    for lo in range(0, total, CHUNK):
        hi = min(lo + CHUNK, total)
        assign = _assignments(inst.n, inst.m, lo, hi)
        zero = 0 if dtype is object else np.zeros((), dtype=dtype)
        utils = np.stack([np.where(assign == i, scaled[i], zero).sum(axis=1) for i in range(inst.n)], axis=1)
        sizes = np.stack([(assign == i).sum(axis=1) for i in range(inst.n)], axis=1)
        yield lo, utils, sizes


def find_dominator(inst: Instance, alloc: Allocation, cap: int = DEFAULT_CAP) -> Optional[Allocation]:
    """First complete allocation (by index) that Pareto-dominates ``alloc``, or None."""
    _require_cap(inst.n, inst.m, cap)
    if inst.is_additive():
        rows, den = integer_scale(inst)
        base = np.array([sum(rows[i][g] for g in alloc.bundles[i]) for i in range(inst.n)], dtype=object)
        for lo, utils, _ in utility_chunks(inst, cap=cap):
            ge = (utils >= base.astype(utils.dtype)).all(axis=1)
            gt = (utils > base.astype(utils.dtype)).any(axis=1)
            hits = np.flatnonzero(ge & gt)
            if len(hits):
                return allocation_from_index(inst.n, inst.m, lo + int(hits[0]))
        return None
    for cand in iter_allocations(inst.n, inst.m, cap=cap):
        if dominates(inst, cand, alloc):
            return cand
    return None


# ---------------------------------------------------------------------------
# join graph


@dataclass(frozen=True)
class JoinGraph:
    n: int
    edges: frozenset
    edge_witness: dict = field(compare=False, hash=False)

    def components(self) -> list:
        """Weakly connected components as ``(agents, edges)`` pairs."""
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in self.edges:
            parent[find(i)] = find(j)
        groups = {}
        for a in range(self.n):
            groups.setdefault(find(a), set()).add(a)
        out = []
        for members in sorted(groups.values(), key=min):
            es = frozenset(e for e in self.edges if e[0] in members)
            out.append((frozenset(members), es))
        return out

    def incident(self, agent: int) -> bool:
        return any(agent in e for e in self.edges)


def _favourite_in(inst: Instance, agent: int, own: frozenset, union: frozenset) -> bool:
    v = inst.valuations[agent]
    best = max(v.good(g) for g in union)
    return any(v.good(g) == best for g in own)


def criterion_holds(inst: Instance, edge: tuple, alloc: Allocation) -> bool:
    """Re-verify that ``alloc`` witnesses join-graph edge ``edge``."""
    i, j = edge
    sizes = alloc.sizes()
    if alloc.allocated() != inst.goods or min(sizes) < 1 or not check(inst, alloc, EFX).holds:
        return False
    if i == j:
        return sizes[i] == 3
    return sizes[i] == 2 and sizes[j] == 2 and _favourite_in(inst, j, alloc[j], alloc[i] | alloc[j])


def build_join_graph(inst: Instance, cap: int = DEFAULT_CAP) -> JoinGraph:
    if inst.m != inst.n + 2:
        raise ValueError(f"join graphs need m = n + 2, got n={inst.n}, m={inst.m}")
    witness = {}
    for idx in satisfying_indices(inst, EFX, cap=cap):
        alloc = allocation_from_index(inst.n, inst.m, idx)
        sizes = alloc.sizes()
        if min(sizes) < 1:
            continue
        big = [a for a in range(inst.n) if sizes[a] >= 2]
        if len(big) == 1:
            witness.setdefault((big[0], big[0]), alloc)
            continue
        i, j = big
        union = alloc[i] | alloc[j]
        if _favourite_in(inst, j, alloc[j], union):
            witness.setdefault((i, j), alloc)
        if _favourite_in(inst, i, alloc[i], union):
            witness.setdefault((j, i), alloc)
    return JoinGraph(inst.n, frozenset(witness), witness)


# ---------------------------------------------------------------------------
# randomised minimum-count search


def random_additive_instance(rng: np.random.Generator, n: int, m: int, value_range: int = 1000, weights=None) -> Instance:
    values = rng.integers(0, value_range + 1, size=(n, m))
    return Instance.additive([[int(x) for x in row] for row in values], weights)


@dataclass(frozen=True)
class SearchResult:
    min_count: int
    instance: Instance
    seed: int
    samples: int

    def to_doc(self) -> dict:
        from .core import instance_to_doc

        return {"min_count": self.min_count, "seed": self.seed, "samples": self.samples, "instance": instance_to_doc(self.instance)}


def min_count_search(
    n: int,
    m: int,
    prop: Property = EFX,
    samples: int = 100,
    seed: int = 0,
    value_range: int = 1000,
    cap: int = DEFAULT_CAP,
) -> SearchResult:
    """Draw ``samples`` uniform integer additive instances; keep the one with the fewest ``prop`` allocations."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    _require_cap(n, m, cap)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(samples):
        weights = None
        if prop.weighted:
            weights = tuple(int(w) for w in rng.integers(1, 7, size=n))
        inst = random_additive_instance(rng, n, m, value_range, weights)
        c = count_satisfying(inst, prop, cap=cap, max_witnesses=0).satisfying
        if best is None or c < best[0]:
            best = (c, inst)
    return SearchResult(best[0], best[1], seed, samples)
