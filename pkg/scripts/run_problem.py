"""Solve a problem file and write <name>.json and <name>.txt into an output directory.

    python3 scripts/run_problem.py problems/rank4.json --outdir results
"""

import argparse
import json
import logging
from pathlib import Path

from sintegral.pipeline import format_text, parse_problem, result_document, run_pipeline


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("problem")
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--config", action="append", default=[], metavar="KEY=VALUE")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    doc = json.loads(Path(args.problem).read_text())
    over = dict(kv.split("=", 1) for kv in args.config)
    res = run_pipeline(parse_problem(doc, over))
    out = result_document(res, include_timing=True)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.problem).stem
    (outdir / f"{stem}.json").write_text(json.dumps(out, indent=2) + "\n")
    (outdir / f"{stem}.txt").write_text(format_text(out))
    print(format_text(out))


if __name__ == "__main__":
    main()
