"""1/4-WEFX allocations for two weighted additive agents."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .core import Additive, Allocation, Instance, from_mask
from .fairness import alpha_wefx, check

MAX_SUBSET_GOODS = 24
QUARTER = alpha_wefx(Fraction(1, 4))


def normalize_two_agent(inst: Instance) -> Instance:
    """Scale weights to sum 1 and each agent's values to total 1."""
    if inst.n != 2:
        raise ValueError(f"needs two agents, got n={inst.n}")
    if not inst.is_additive():
        raise ValueError("needs additive valuations")
    if inst.weights is None:
        raise ValueError("needs weights")
    vals = []
    for i, v in enumerate(inst.valuations):
        total = sum(v.values, Fraction(0))
        if total == 0:
            raise ValueError(f"agent {i} values every good at zero")
        vals.append(Additive(tuple(x / total for x in v.values)))
    wsum = sum(inst.weights)
    return Instance(2, inst.m, tuple(vals), tuple(w / wsum for w in inst.weights))


@dataclass(frozen=True)
class SplitObjective:
    subset: frozenset
    f_value: Fraction
    cardinality: int


def f_value(inst: Instance, subset) -> Fraction:
    """``min(v1(A) - w1, 0) + min(v2(G - A) - w2, 0)`` for a normalized instance."""
    subset = frozenset(subset)
    v1, v2 = inst.valuations
    w1, w2 = inst.weights
    return min(v1.value(subset) - w1, 0) + min(v2.value(inst.goods - subset) - w2, 0)


def maximize_f(inst: Instance) -> SplitObjective:
    """Exhaustive maximiser of f; ties go to the larger subset, then the lower bitmask."""
    m = inst.m
    if m > MAX_SUBSET_GOODS:
        raise ValueError(f"exhaustive subset scan supports m <= {MAX_SUBSET_GOODS}, got {m}")
    v1, v2 = inst.valuations
    w1, w2 = inst.weights
    den = 1
    for x in v1.values + v2.values + (w1, w2):
        den = lcm(den, x.denominator)
    dtype = np.int64 if 4 * den < 1 << 62 else object
    a = np.array([int(x * den) for x in v1.values], dtype=dtype)
    b = np.array([int(x * den) for x in v2.values], dtype=dtype)
    W1, W2 = int(w1 * den), int(w2 * den)
    masks = np.arange(1 << m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m, dtype=np.int64)[None, :]) & 1).astype(bool)
    in_a = np.where(bits, a, 0).sum(axis=1)
    out_b = np.where(~bits, b, 0).sum(axis=1)
    f = np.minimum(in_a - W1, 0) + np.minimum(out_b - W2, 0)
    card = bits.sum(axis=1)
    cand = np.flatnonzero(f == f.max())
    cand = cand[card[cand] == card[cand].max()]
    best = int(cand[0])
    return SplitObjective(from_mask(best), Fraction(int(f[best]), den), int(card[best]))


@dataclass
class QuarterStats:
    """How :func:`quarter_wefx` found its answer."""

    case: str = ""
    fallback_used: bool = False
    candidates_tried: int = 0


def _oriented_candidates(norm: Instance, short: int, A_short: frozenset) -> tuple:
    """Candidate bundles for the short agent (``v_short(A) < w_short``) in the order the argument visits them.

    Returns ``(case, [bundle for short agent, ...])``.
    """
    long_ = 1 - short
    vs, vl = norm.valuations[short], norm.valuations[long_]
    wl = norm.weights[long_]
    G = norm.goods
    rest = G - A_short
    cands = [A_short]
    ahead = [g for g in sorted(rest) if vs.good(g) > vl.good(g)]
    if vl.value(rest) < wl:
        case = "both-short"
        cands += [frozenset({g}) for g in ahead]
        behind = [g for g in sorted(A_short) if vl.good(g) > vs.good(g)]
        cands += [G - {g} for g in behind]
    else:
        case = "one-short"
        cands += [frozenset({g}) for g in ahead]
        cands += [frozenset({g}) for g in sorted(rest) if vl.good(g) < wl]
    return case, cands


def quarter_wefx_stats(inst: Instance) -> tuple:
    norm = normalize_two_agent(inst)
    best = maximize_f(norm)
    A = best.subset
    G = norm.goods
    stats = QuarterStats()

    def as_alloc(bundle_short: frozenset, short: int) -> Allocation:
        bundles = [None, None]
        bundles[short], bundles[1 - short] = bundle_short, G - bundle_short
        return Allocation(tuple(bundles))

    if best.f_value == 0:
        stats.case = "exact"
        stats.candidates_tried = 1
        return Allocation((A, G - A)), stats

    v1, v2 = norm.valuations
    w1, _ = norm.weights
    if v1.value(A) < w1:
        short, A_short = 0, A
    else:
        short, A_short = 1, G - A
    stats.case, cands = _oriented_candidates(norm, short, A_short)
    seen = set()
    for bundle in cands:
        if bundle in seen:
            continue
        seen.add(bundle)
        stats.candidates_tried += 1
        alloc = as_alloc(bundle, short)
        if check(inst, alloc, QUARTER).holds:
            return alloc, stats
    stats.fallback_used = True
    for g in range(inst.m):
        for bundle_short in (frozenset({g}), G - {g}):
            alloc = as_alloc(bundle_short, short)
            stats.candidates_tried += 1
            if check(inst, alloc, QUARTER).holds:
                return alloc, stats
    raise RuntimeError("no 1/4-WEFX candidate found")


def quarter_wefx(inst: Instance) -> Allocation:
    return quarter_wefx_stats(inst)[0]

