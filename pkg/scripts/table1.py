"""Cost, time, plans and states for direct A* and the angelic searches on one world.

    python3 scripts/table1.py                      # structured world, n = 10000
    python3 scripts/table1.py --problem corridor4 --samples 2000
"""
from __future__ import annotations

import argparse
import sys

from angelic.bench import run, write_records
from angelic.bundle import make_abstraction
from angelic.fixtures import load_fixture

ROWS = (("astar", 1.0), ("acyclic", 1.0), ("approx", 1.5), ("approx", 2.5))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--problem", default="nav_structured")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--metrics", help="also write JSONL records here")
    args = ap.parse_args()

    b = load_fixture(args.problem)
    dom = make_abstraction(b, args.samples, args.seed)
    recs = [run(b, algo, w, args.seed, args.samples, abstraction=dom) for algo, w in ROWS]
    print(f"{b.name}: n = {len(dom.roadmap)}, roadmap edges = {len(dom.roadmap.edges)}")
    print(f"{'algorithm':<14}{'cost':>10}{'time (s)':>10}{'plans':>9}{'states':>9}")
    for r in recs:
        label = r.algo if r.algo != "approx" else f"approx w={r.weight:g}"
        cost = f"{r.cost:.3f}" if r.cost is not None else "-"
        print(f"{label:<14}{cost:>10}{r.wall_time:>10.2f}{r.plans_expanded:>9}{r.states_explored:>9}")
    if args.metrics:
        with open(args.metrics, "w") as fh:
            write_records(recs, fh)
    base = recs[0]
    if base.cost is None:
        sys.exit("direct A* found no path")


if __name__ == "__main__":
    main()
