"""Reachable state counts across green/red times and environment settings."""

from __future__ import annotations

import argparse
import itertools
import time

from crosslight.checker import build_state_graph
from crosslight.scenarios import ScenarioError, build_init, init_spec


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--greens", type=int, nargs="+", default=[4, 5, 6])
    ap.add_argument("--reds", type=int, nargs="+", default=[5, 6, 7])
    ap.add_argument("--period", type=int, default=0, help="emergency period, 0 for none")
    args = ap.parse_args()
    print(f"{'green':>5} {'red':>4} {'states':>9} {'transitions':>12} {'deadlocks':>9} {'s':>6}")
    for green, red in itertools.product(args.greens, args.reds):
        try:
            spec = init_spec("Spitsbergen", green, red, args.period, 0, 0, 1, 1)
            spec.validate()
        except ScenarioError as exc:
            print(f"{green:5} {red:4} skipped: {exc}")
            continue
        started = time.perf_counter()
        g = build_state_graph(build_init(spec), spec.params)
        print(f"{green:5} {red:4} {len(g.states):9} {g.transitions:12} {len(g.stuck):9} "
              f"{time.perf_counter() - started:6.1f}")


if __name__ == "__main__":
    main()
