"""Command line front end.

    sintegral solve problem.json [--format text|json] [--bound-only] [--trace]
                                 [--threads N] [--config key=value ...] [--out FILE]

Exit codes: 0 success, 2 invalid problem, 3 unsupported place (bad
reduction or q = 2), 4 precision or convergence failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import (BadReduction, DegenerateCurve, EvenCharacteristic, IdentityPoint,
                     InvalidProblem, NotIndependent, SIntegralError)
from .pipeline import format_text, parse_problem, result_document, run_pipeline

EXIT_OK, EXIT_INVALID, EXIT_UNSUPPORTED, EXIT_PRECISION = 0, 2, 3, 4


def exit_code_for(err: Exception) -> int:
    if isinstance(err, (BadReduction, EvenCharacteristic)):
        return EXIT_UNSUPPORTED
    if isinstance(err, (InvalidProblem, NotIndependent, IdentityPoint, DegenerateCurve)):
        return EXIT_INVALID
    return EXIT_PRECISION


def _parse_overrides(items: list[str]) -> dict[str, str]:
    out = {}
    for it in items:
        if "=" not in it:
            raise InvalidProblem(f"--config expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sintegral", description="S-integral points on y^2 = x^3 + ax + b")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="solve a problem file")
    s.add_argument("file", help="problem JSON (big integers as strings)")
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--bound-only", action="store_true", help="emit the initial bounds and stop")
    s.add_argument("--trace", action="store_true", help="verbose stage logging; timings in the output")
    s.add_argument("--threads", type=int, default=None, help="cap on worker processes and BLAS threads")
    s.add_argument("--config", action="append", default=[], metavar="KEY=VALUE")
    s.add_argument("--out", default=None, help="write the result here instead of stdout")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    return format_text(doc)


def solve(args) -> int:
    log = logging.getLogger("sintegral")
    try:
        with open(args.file) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        log.error("[parse] %s", e)
        return EXIT_INVALID
    try:
        overrides = _parse_overrides(args.config)
        if args.threads is not None:
            overrides["threads"] = str(args.threads)
        spec = parse_problem(doc, overrides)
    except SIntegralError as e:
        log.error("[parse] %s", e)
        return exit_code_for(e)
    if spec.config.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(spec.config.threads))
    try:
        res = run_pipeline(spec, bound_only=args.bound_only)
    except SIntegralError as e:
        stage = getattr(e, "stage", "?")
        log.error("[%s] %s: %s", stage, type(e).__name__, e)
        partial = getattr(e, "partial", None)
        if partial is not None:
            pdoc = result_document(partial, include_timing=args.trace)
            pdoc["status"] = {"ok": False, "stage": stage, "error": f"{type(e).__name__}: {e}"}
            _emit(_render(pdoc, args.format), args.out)
        return exit_code_for(e)
    out = result_document(res, include_timing=args.trace)
    _emit(_render(out, args.format), args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "trace", False) else logging.INFO,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    if args.command == "solve":
        return solve(args)
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
