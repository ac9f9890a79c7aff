"""Check every catalog property on its scenario and print a table."""

from __future__ import annotations

import argparse
import time

from crosslight.checker import (CATALOG, CATALOG_SCENARIOS, P5_BOUND, P5_RESPONSE, P5_TRIGGER,
                                build_state_graph, check_bounded_response_graph,
                                check_ltl_graph)
from crosslight.scenarios import build_init


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", nargs="*", help="property names to run (default all)")
    args = ap.parse_args()
    names = args.only or [*CATALOG, "P5"]
    graphs = {}
    print(f"{'property':8} {'verdict':9} {'states':>8} {'transitions':>12} {'seconds':>8}")
    for name in names:
        spec = CATALOG_SCENARIOS[name]
        started = time.perf_counter()
        if spec not in graphs:
            graphs[spec] = build_state_graph(build_init(spec), spec.params)
        g = graphs[spec]
        if name == "P5":
            v = check_bounded_response_graph(g, P5_TRIGGER, P5_RESPONSE, P5_BOUND)
        else:
            v = check_ltl_graph(g, CATALOG[name])
        print(f"{name:8} {v.name:9} {len(g.states):8} {g.transitions:12} "
              f"{time.perf_counter() - started:8.1f}")


if __name__ == "__main__":
    main()
