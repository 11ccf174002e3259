"""Random search for additive instances with few EFX allocations at m = n + 2.

Draws uniform integer valuations and keeps the instance with the fewest
allocations satisfying the property. Results are appended as JSON lines.
"""
import argparse
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from efxlab.enumeration import min_count_search
from efxlab.fairness import Property


@dataclass
class SearchConfig:
    n: int = 5
    m: Optional[int] = None  # defaults to n + 2
    prop: str = "efx"
    samples: int = 500
    seed: int = 0
    value_range: int = 1000
    out: Optional[str] = None


def run(cfg: SearchConfig) -> dict:
    m = cfg.m if cfg.m is not None else cfg.n + 2
    t0 = time.perf_counter()
    res = min_count_search(cfg.n, m, Property.parse(cfg.prop), cfg.samples, cfg.seed, cfg.value_range)
    doc = {"config": asdict(cfg), "seconds": round(time.perf_counter() - t0, 2), **res.to_doc()}
    if cfg.out:
        with Path(cfg.out).open("a") as fh:
            fh.write(json.dumps(doc) + "\n")
    return doc


def parse_args() -> SearchConfig:
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(SearchConfig()).items():
        kind = str if name in ("prop", "out") else int
        ap.add_argument(f"--{name.replace('_', '-')}", type=kind, default=default)
    return SearchConfig(**vars(ap.parse_args()))


if __name__ == "__main__":
    doc = run(parse_args())
    print(f"n={doc['config']['n']} samples={doc['samples']} seed={doc['seed']}: min count {doc['min_count']} ({doc['seconds']}s)")
