"""Run the constructive algorithms over seeded random instances and tally checker verdicts."""
import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from efxlab.approx import QUARTER, quarter_wefx_stats
from efxlab.construct import alg1_n_plus_2, cut_and_choose_efx, weighted_leximinpp_optimal
from efxlab.core import Instance
from efxlab.enumeration import random_additive_instance
from efxlab.fairness import EFX, PO, WEFX, check
from efxlab.wefx_po import wefx_po_binary


@dataclass
class AuditConfig:
    runs: int = 200
    seed: int = 1
    max_n: int = 5
    value_range: int = 1000


def audit(cfg: AuditConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    tally = {k: [0, 0] for k in ("alg1", "cut-and-choose", "wefx-po-binary", "leximin-pp", "quarter-wefx")}

    def mark(key, ok):
        tally[key][0] += bool(ok)
        tally[key][1] += 1

    for _ in range(cfg.runs):
        n = int(rng.integers(2, cfg.max_n + 1))
        inst = random_additive_instance(rng, n, n + 2, cfg.value_range)
        mark("alg1", check(inst, alg1_n_plus_2(inst), EFX).holds)
        two = random_additive_instance(rng, 2, int(rng.integers(1, 9)), cfg.value_range)
        mark("cut-and-choose", check(two, cut_and_choose_efx(two), EFX).holds)
        rows = rng.integers(0, 2, size=(n, int(rng.integers(0, 8)))).tolist()
        binary = Instance.additive(rows, tuple(int(w) for w in rng.integers(1, 7, size=n)))
        for key, solver in (("wefx-po-binary", wefx_po_binary), ("leximin-pp", weighted_leximinpp_optimal)):
            out = solver(binary)
            mark(key, check(binary, out, WEFX).holds and check(binary, out, PO).holds)
        weighted = two.with_weights(tuple(int(w) for w in rng.integers(1, 10, size=2)))
        if all(sum(v.values) > 0 for v in weighted.valuations):
            out, stats = quarter_wefx_stats(weighted)
            mark("quarter-wefx", check(weighted, out, QUARTER).holds and not stats.fallback_used)
    return {"config": asdict(cfg), "passed/total": {k: f"{a}/{b}" for k, (a, b) in tally.items()}}


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(AuditConfig()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=int, default=default)
    print(json.dumps(audit(AuditConfig(**vars(ap.parse_args()))), indent=2))
