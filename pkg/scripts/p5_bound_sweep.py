"""Sweep the bound of pedArriving(NS) => <>le(tau) walking(NS) to find the tight value."""

from __future__ import annotations

import argparse

from crosslight.checker import (CATALOG_SCENARIOS, P5_RESPONSE, P5_TRIGGER, build_state_graph,
                                check_bounded_response_graph)
from crosslight.scenarios import build_init, init_spec


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-tau", type=int, default=20)
    ap.add_argument("--green", type=int, default=None)
    ap.add_argument("--red", type=int, default=None)
    args = ap.parse_args()
    spec = CATALOG_SCENARIOS["P5"]
    if args.green or args.red:
        spec = init_spec(spec.xing, args.green or spec.green_time, args.red or spec.red_time,
                         0, 0, 0, 1, 1)
    g = build_state_graph(build_init(spec), spec.params)
    tight = None
    for tau in range(args.max_tau + 1):
        v = check_bounded_response_graph(g, P5_TRIGGER, P5_RESPONSE, tau)
        print(f"tau={tau:3} {v.name}")
        if v.holds and tight is None:
            tight = tau
    print(f"green={spec.green_time} red={spec.red_time} states={len(g.states)} tightest={tight}")


if __name__ == "__main__":
    main()
