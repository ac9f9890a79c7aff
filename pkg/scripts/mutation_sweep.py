"""Driving exclusion under mutated car-light controllers.

Sweeps the green extension with and without the safety margin, plus the
mutant that skips the safety phase entirely.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from crosslight.checker import (CATALOG_SCENARIOS, P4X, build_state_graph, check_ltl_graph,
                                replay_verdict)
from crosslight.devices import Params
from crosslight.scenarios import build_init

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from mutants import green_straight_from_red, no_safety_margin, patched_fire, retimed  # noqa: E402


def check(fire, label: str) -> None:
    init = build_init(CATALOG_SCENARIOS["P4x"])
    p = Params()
    with patched_fire(fire):
        g = build_state_graph(init, p)
        v = check_ltl_graph(g, P4X)
        if not v.holds:
            replay_verdict(v, p, init)
    steps = "" if v.holds else f" trace={len(v.prefix)}+{len(v.cycle)}"
    print(f"{label:34} {v.name:9} states={len(g.states)}{steps}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-extra", type=int, default=3)
    args = ap.parse_args()
    for extra in range(args.max_extra + 1):
        check(retimed(extra), f"margin kept, green+{extra}")
        check(no_safety_margin(extra), f"margin dropped, green+{extra}")
    check(green_straight_from_red, "redToGreen from red")


if __name__ == "__main__":
    main()
