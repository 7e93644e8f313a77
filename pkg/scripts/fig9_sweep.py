"""Plans expanded against roadmap size on a door puzzle, averaged over seeds.

Writes the raw JSONL records and prints one line per (algorithm, n).

    python3 scripts/fig9_sweep.py --samples 100,200,300 --seeds 3
"""
from __future__ import annotations

import argparse
from collections import defaultdict
from statistics import mean

from angelic.bench import sweep
from angelic.fixtures import load_fixture


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--problem", default="door_fig6")
    ap.add_argument("--samples", default="100,200,300")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--algo", default="astar,acyclic,approx")
    ap.add_argument("--weight", type=float, default=2.5, help="weight used for approx")
    ap.add_argument("--metrics", default="fig9.jsonl")
    args = ap.parse_args()

    b = load_fixture(args.problem)
    ns = [int(x) for x in args.samples.split(",")]
    algos = args.algo.split(",")
    table: dict = defaultdict(list)
    with open(args.metrics, "w") as fh:
        for algo in algos:
            w = args.weight if algo == "approx" else 1.0
            for rec in sweep(b, [algo], [w], ns, range(args.seeds)):
                fh.write(rec.to_json() + "\n")
                if rec.cost is not None:
                    table[(algo, rec.n)].append(rec)
    print(f"{'algorithm':<10}{'n':>7}{'plans':>10}{'states':>10}{'cost':>10}")
    for (algo, n), recs in sorted(table.items(), key=lambda kv: (kv[0][1], algos.index(kv[0][0]))):
        print(f"{algo:<10}{n:>7}{mean(r.plans_expanded for r in recs):>10.0f}"
              f"{mean(r.states_explored for r in recs):>10.0f}{mean(r.cost for r in recs):>10.3f}")


if __name__ == "__main__":
    main()
