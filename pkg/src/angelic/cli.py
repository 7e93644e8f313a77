"""Command-line planner and benchmark sweeps.

    angelic-bench plan --problem corridor4 --algo acyclic --svg out.svg
    angelic-bench sweep --problem door_fig6 --algo astar,acyclic --samples 100,200 --seed 0,1

``--problem`` takes a bundle path or the name of a bundled fixture.  Exit
codes: 0 on success (an infeasible problem is a reported result), 2 on bad
input, 3 on an internal error.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
import time
from pathlib import Path

from .bench import ALGOS, run, sweep, write_records
from .bundle import BundleError, ProblemBundle, load_problem, make_abstraction
from .core import ConfigurationError
from .domains.door import InfeasibleError
from .fixtures import BUILDERS, fixture_names, load_fixture
from .render import write_svg

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3
log = logging.getLogger("angelic")


class InputError(Exception):
    pass


def _problem(spec: str) -> ProblemBundle:
    path = Path(spec)
    if path.exists():
        return load_problem(path)
    if spec in BUILDERS:
        return load_fixture(spec)
    raise InputError(f"no such file or fixture: {spec!r} (fixtures: {', '.join(fixture_names())})")


def _list(text: str, conv):
    try:
        return [conv(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="angelic-bench", description="Angelic hierarchical planner and benchmarks")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("plan", help="solve one problem")
    p.add_argument("--problem", required=True, help="bundle file or fixture name")
    p.add_argument("--algo", required=True, choices=ALGOS)
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--samples", type=int, help="override the roadmap sample count")
    p.add_argument("--seed", type=int, help="override the roadmap (or generator) seed")
    p.add_argument("--trace", action="store_true", help="record one trace entry per expansion")
    p.add_argument("--svg", type=Path, help="write a drawing of the result")
    p.add_argument("--metrics", type=Path, help="append the metrics record to this JSONL file")
    p.add_argument("--cap", type=int, default=1_000_000, help="expansion cap")

    s = sub.add_parser("sweep", help="cross product of runs, one JSONL record each")
    s.add_argument("--problem", required=True)
    s.add_argument("--algo", required=True, type=lambda t: _list(t, str))
    s.add_argument("--weight", type=lambda t: _list(t, float), default=[1.0])
    s.add_argument("--samples", type=lambda t: _list(t, int), default=[None])
    s.add_argument("--seed", type=lambda t: _list(t, int), default=[None])
    s.add_argument("--metrics", type=Path, help="output file (default stdout)")

    sub.add_parser("fixtures", help="list bundled fixtures")
    return ap


def _plan(args) -> int:
    b = _problem(args.problem)
    trace = args.trace or args.svg is not None
    dom, build = None, None
    if args.svg is not None and b.kind in ("nav", "door"):
        t0 = time.perf_counter()
        with contextlib.suppress(InfeasibleError):  # run() reports it
            dom = make_abstraction(b, args.samples, args.seed)
            build = time.perf_counter() - t0
    rec = run(b, args.algo, args.weight, args.seed, args.samples, trace, args.cap, abstraction=dom)
    if build is not None:
        rec.build_time = build
    text = rec.to_json()
    print(text)
    if args.metrics is not None:
        with args.metrics.open("a") as fh:
            fh.write(text + "\n")
    if args.trace and rec.trace is not None:
        log.info("trace: %d records", len(rec.trace))
    if args.svg is not None:
        write_svg(args.svg, b, dom, rec.solution, rec.trace if args.trace else None)
    return EXIT_OK


def _sweep(args) -> int:
    b = _problem(args.problem)
    bad = [a for a in args.algo if a not in ALGOS]
    if bad:
        raise InputError(f"unknown algorithm(s) {bad}; choose from {', '.join(ALGOS)}")
    if any(w < 1.0 for w in args.weight):
        raise InputError("weights must be >= 1")
    records = sweep(b, args.algo, args.weight, args.samples, args.seed)
    with contextlib.ExitStack() as stack:
        out = stack.enter_context(args.metrics.open("w")) if args.metrics else sys.stdout
        write_records(records, out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.cmd == "fixtures":
            for name in fixture_names():
                print(name)
            return EXIT_OK
        return _plan(args) if args.cmd == "plan" else _sweep(args)
    except (BundleError, ConfigurationError, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        log.exception("internal error")
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
