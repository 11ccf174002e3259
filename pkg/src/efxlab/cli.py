"""``efxlab`` command line.

Exit codes: 0 success or property holds, 1 property fails or nothing
satisfies it, 2 usage or input error, 3 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .approx import quarter_wefx
from .construct import (
    alg1_n_plus_2,
    bobw_lottery,
    cut_and_choose_efx,
    leximax_cut_efx_plus,
    weighted_leximinpp_optimal,
)
from .core import AllocationError, InstanceError, format_rational, instance_to_doc, parse_allocation, parse_instance
from .enumeration import allocation_from_index, count_satisfying, min_count_search, satisfying_indices
from .fairness import DEFAULT_CAP, CapExceeded, Property, check
from .fixtures import export_fixtures, report_json, report_table, verify_paper_suite
from .reduction import graph_to_instance, min_exponent_k, parse_graph, permanent, recover_matching_count
from .wefx_po import wefx_po_binary

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

ALGORITHMS = {
    "n-plus-2": lambda inst, cap: alg1_n_plus_2(inst),
    "cut-and-choose": lambda inst, cap: cut_and_choose_efx(inst),
    "leximax-efx-plus": lambda inst, cap: leximax_cut_efx_plus(inst),
    "leximin-pp": lambda inst, cap: weighted_leximinpp_optimal(inst, cap=cap),
    "wefx-po-binary": lambda inst, cap: wefx_po_binary(inst),
    "quarter-wefx": lambda inst, cap: quarter_wefx(inst),
    "bobw": lambda inst, cap: bobw_lottery(inst),
}
PROPERTIES = ("ef", "ef1", "efx", "efx-plus", "po", "wef", "wefx", "wwefx", "alpha-wefx")


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _instance(args):
    if not args.instance:
        raise UsageError("--instance is required")
    return parse_instance(_read(args.instance))


def _property(args) -> Property:
    if args.property == "alpha-wefx" and args.alpha is None:
        raise UsageError("--property alpha-wefx needs --alpha p/q")
    alpha = None
    if args.alpha is not None:
        try:
            alpha = Fraction(args.alpha)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"--alpha: not a rational {args.alpha!r}") from None
    return Property.parse(args.property, alpha)


def _cap(args) -> int:
    if args.cap is not None:
        return args.cap
    env = os.environ.get("EFXLAB_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"EFXLAB_CAP: not an integer {env!r}") from None
    return DEFAULT_CAP


def _emit(args, doc, text: str) -> None:
    if args.format == "table":
        print(text)
    else:
        print(json.dumps(doc, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# verbs


def cmd_check(args) -> int:
    inst = _instance(args)
    if not args.allocation:
        raise UsageError("--allocation is required")
    alloc = parse_allocation(_read(args.allocation), inst)
    prop = _property(args)
    rep = check(inst, alloc, prop, cap=_cap(args))
    doc = {"property": str(prop), **rep.to_doc()}
    text = f"{prop}: {'holds' if rep.holds else 'fails'}"
    if rep.witness is not None:
        w = rep.witness
        good = "" if w.good is None else f" (good g{w.good + 1})"
        text += f"; agent {w.envier + 1} towards agent {w.envied + 1}{good}"
    if rep.dominator is not None:
        text += f"; dominated by {rep.dominator}"
    _emit(args, doc, text)
    return EXIT_OK if rep.holds else EXIT_FAIL


def cmd_count(args) -> int:
    inst = _instance(args)
    prop = _property(args)
    res = count_satisfying(inst, prop, cap=_cap(args), threads=args.threads, max_witnesses=0)
    doc = {"property": str(prop), "count": res.satisfying, "checked": res.total_checked}
    _emit(args, doc, str(res.satisfying))
    return EXIT_OK if res.satisfying else EXIT_FAIL


def cmd_enumerate(args) -> int:
    inst = _instance(args)
    prop = _property(args)
    found = []
    for idx in satisfying_indices(inst, prop, cap=_cap(args)):
        found.append(allocation_from_index(inst.n, inst.m, idx))
        if args.limit and len(found) >= args.limit:
            break
    doc = {"property": str(prop), "allocations": [a.to_doc() for a in found]}
    _emit(args, doc, "\n".join(str(a) for a in found) or "none")
    return EXIT_OK if found else EXIT_FAIL


def cmd_solve(args) -> int:
    inst = _instance(args)
    if not args.algorithm:
        raise UsageError("--algorithm is required")
    out = ALGORITHMS[args.algorithm](inst, _cap(args))
    if args.algorithm == "bobw":
        doc = {
            "lottery": [{"probability": format_rational(p), "allocation": a.to_doc()} for p, a in out.entries],
            "ex_ante_ef": out.ex_ante_ef(inst),
        }
        text = "\n".join(f"{format_rational(p)}  {a}" for p, a in out.entries)
    else:
        doc, text = out.to_doc(), str(out)
    _emit(args, doc, text)
    return EXIT_OK


def cmd_search(args) -> int:
    prop = _property(args)
    m = args.m if args.m is not None else args.n + 2
    res = min_count_search(args.n, m, prop, samples=args.samples, seed=args.seed, cap=_cap(args))
    text = f"min {prop} count over {args.samples} samples (seed {args.seed}): {res.min_count}"
    _emit(args, res.to_doc(), text)
    return EXIT_OK


def cmd_reduce(args) -> int:
    if not args.graph:
        raise UsageError("--graph is required")
    g = parse_graph(_read(args.graph), args.side)
    count = recover_matching_count(g, cap=_cap(args), threads=args.threads)
    doc = {"n": g.n, "edges": len(g.adjacency), "matchings": count}
    if not g.isolated_left() and g.n >= 2:
        doc["k"] = min_exponent_k(g.n)
        doc["instance"] = instance_to_doc(graph_to_instance(g))
    if args.oracle:
        doc["permanent"] = permanent(g)
    _emit(args, doc, str(count))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.export:
        export_fixtures(args.export)
    rows = verify_paper_suite()
    if args.format == "table":
        print(report_table(rows))
    else:
        print(report_json(rows))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


VERBS = {
    "check": cmd_check,
    "count": cmd_count,
    "enumerate": cmd_enumerate,
    "solve": cmd_solve,
    "search": cmd_search,
    "reduce": cmd_reduce,
    "verify-paper": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="efxlab", description="Exact fair-division workbench for indivisible goods.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--cap", type=int, default=None, help="enumeration cap (default: $EFXLAB_CAP or 10^8)")
    common.add_argument("--threads", type=int, default=1)
    prop = argparse.ArgumentParser(add_help=False)
    prop.add_argument("--property", choices=PROPERTIES, default="efx")
    prop.add_argument("--alpha", default=None, help="p/q, for alpha-wefx")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("check", parents=[common, prop])
    s.add_argument("--instance")
    s.add_argument("--allocation")
    s = sub.add_parser("count", parents=[common, prop])
    s.add_argument("--instance")
    s = sub.add_parser("enumerate", parents=[common, prop])
    s.add_argument("--instance")
    s.add_argument("--limit", type=int, default=0, help="stop after this many (0: all)")
    s = sub.add_parser("solve", parents=[common])
    s.add_argument("--instance")
    s.add_argument("--algorithm", choices=sorted(ALGORITHMS))
    s = sub.add_parser("search", parents=[common, prop])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, default=None, help="defaults to n + 2")
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("reduce", parents=[common])
    s.add_argument("--graph")
    s.add_argument("--side", type=int, default=None, help="side size if larger than the edge list implies")
    s.add_argument("--oracle", action="store_true", help="also report the brute-force permanent")
    s = sub.add_parser("verify-paper", parents=[common])
    s.add_argument("--export", default=None, help="also write fixture instances to this directory")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return VERBS[args.verb](args)
    except CapExceeded as exc:
        print(f"efxlab: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, InstanceError, AllocationError, ValueError) as exc:
        print(f"efxlab: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
