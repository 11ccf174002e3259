"""Write every benchmark instance to fixtures/<id>.json."""
import argparse
from pathlib import Path

from efxlab.fixtures import export_fixtures

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "fixtures"))
    args = ap.parse_args()
    for p in export_fixtures(args.out):
        print(p)
