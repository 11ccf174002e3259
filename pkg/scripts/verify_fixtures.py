"""Run every fixture expectation and print the report; exits non-zero on any failure."""
import argparse
import sys

from efxlab.fixtures import report_json, report_table, verify_paper_suite

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = verify_paper_suite()
    print(report_json(rows) if args.json else report_table(rows))
    sys.exit(0 if all(r.passed for r in rows) else 1)
