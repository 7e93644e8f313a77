"""Regenerate the bundled problem files in src/angelic/data/."""
from __future__ import annotations

import argparse
from pathlib import Path

from angelic.bundle import dumps, loads
from angelic.fixtures import BUILDERS

DATA = Path(__file__).resolve().parents[1] / "src" / "angelic" / "data"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", default=sorted(BUILDERS))
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.names:
        text = dumps(BUILDERS[name]())
        loads(text)  # must validate
        (args.out / f"{name}.json").write_text(text + "\n")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
