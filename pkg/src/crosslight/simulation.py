"""Seeded random runs and phase-duration measurement."""

from __future__ import annotations

import random
from typing import Callable

from .checker import DEADLOCK, Step
from .devices import Approach, CarLight, Params
from .kernel import NS, Config, Oid, successors
from .scenarios import build_lights


def random_run(init: Config, params: Params, steps: int, seed: int,
               keep: Callable[[str], bool] | None = None) -> list[Step]:
    """One resolved run of ``steps`` transitions after ``init``.

    Each step picks uniformly among the enabled rules and the maximal tick.
    ``keep`` filters rule labels.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    rng = random.Random(seed)
    c = init
    t = 0
    out = [Step("init", c, 0)]
    for _ in range(steps):
        moves = successors(c, params)
        if keep is not None:
            moves = [(lab, b) for lab, b in moves if keep(lab)]
        if not moves:
            out.append(Step(DEADLOCK, c, t))
            break
        label, c = moves[rng.randrange(len(moves))]
        if label.startswith("tick("):
            t += int(label[5:-1])
        out.append(Step(label, c, t))
    return out


def phase_durations(run: list[Step], oid: Oid) -> list[tuple[tuple, int]]:
    """Maximal intervals of constant ``lights`` for one car light.

    The first and last intervals are truncated by the run and are dropped.
    """
    spans = []
    current, since = None, 0
    for s in run:
        lights = s.state.get(oid).lights
        if lights != current:
            if current is not None:
                spans.append((current, s.time - since))
            current, since = lights, s.time
    return spans[1:]


def steady_traffic_init(xing: str, green_time: int, red_time: int, params: Params) -> Config:
    """Both approaches occupied, no pedestrians, no environments."""
    objs = [o._replace(cars_present=True) if isinstance(o, Approach) else o
            for o in build_lights(xing, NS, green_time, red_time, params)]
    return Config.of(objs)


def steady_traffic_run(xing: str, green_time: int, red_time: int, params: Params,
                       rounds: int, seed: int = 0) -> list[Step]:
    """Run with cars permanently present until ``rounds`` full rounds elapsed."""
    init = steady_traffic_init(xing, green_time, red_time, params)
    cycle = green_time + red_time
    horizon = (rounds + 2) * cycle
    run = [Step("init", init, 0)]
    seed_step = seed
    while run[-1].time <= horizon:
        more = random_run(run[-1].state, params, 64, seed_step,
                          keep=lambda lab: lab != "allCarsPass")
        base = run[-1].time
        run += [Step(s.label, s.state, s.time + base) for s in more[1:]]
        if more[-1].label == DEADLOCK:
            break
        seed_step += 1
    return run


def car_lights(c: Config) -> list[CarLight]:
    return [o for o in c.objects if isinstance(o, CarLight)]
