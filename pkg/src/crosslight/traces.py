"""Line-oriented trace files and their replay through the kernel.

A trace file looks like::

    # scenario: xing = Spitsbergen
    # scenario: green_time = 5
    ...
    t=0 rule=init
    t=0 rule=generateSubsetAndReset | envCarsPeds("Spitsbergen"): time_to_next_events=0→1 | +newCars(...)
    CYCLE-START
    ...
    loop rule=tick(1) | ...

Lines starting with ``#`` other than the scenario header are comments.
"""

from __future__ import annotations

from pathlib import Path

from .checker import DEADLOCK, ReplayError, Step
from .devices import Params
from .kernel import (INF, Config, instantaneous_successors, max_time_elapse, tick,
                     tick_label)
from .scenarios import ScenarioSpec, build_init, format_scenario, parse_scenario

HEADER = "# scenario: "
CYCLE_START = "CYCLE-START"
ARROW = "→"


def _fmt(v) -> str:
    if v == INF and not isinstance(v, (bool, str, tuple)):
        return "inf"
    if isinstance(v, tuple):
        return "+".join(str(x) for x in v) if v else "-"
    return str(v)


def render_diff(a: Config, b: Config) -> str:
    """Changed attributes and added/removed messages between two states."""
    parts = []
    for old, new in zip(a.objects, b.objects):
        if old == new:
            continue
        attrs = [f"{name}={_fmt(x)}{ARROW}{_fmt(y)}"
                 for name, x, y in zip(old._fields, old, new) if x != y]
        parts.append(f"{old.oid}: " + " ".join(attrs))
    before = list(a.messages)
    after = list(b.messages)
    for m in a.messages:
        if m in after:
            after.remove(m)
            before.remove(m)
    parts += [f"-{m}" for m in before]
    parts += [f"+{m}" for m in after]
    return " | ".join(parts)


def step_line(label: str, a: Config | None, b: Config, time: int, prefix: str = "") -> str:
    head = prefix or f"t={time}"
    line = f"{head} rule={label}"
    if a is not None:
        diff = render_diff(a, b)
        if diff:
            line += " | " + diff
    return line


def format_trace(spec: ScenarioSpec, prefix: list[Step], cycle: list[Step] = (),
                 loop_label: str = "", comments: list[str] = ()) -> str:
    lines = [HEADER + ln for ln in format_scenario(spec).splitlines()]
    lines += [f"# {c}" for c in comments]
    prev = None
    for i, s in enumerate([*prefix, *cycle]):
        if i == len(prefix):
            lines.append(CYCLE_START)
        lines.append(step_line(s.label, prev, s.state, s.time))
        prev = s.state
    if cycle:
        lines.append(step_line(loop_label, prev, cycle[0].state, 0, prefix="loop"))
    return "\n".join(lines) + "\n"


def write_trace(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _read_header(lines: list[str], source: str) -> ScenarioSpec:
    body = [ln[len(HEADER):] for ln in lines if ln.startswith(HEADER)]
    if not body:
        raise ReplayError(f"{source}: no scenario header")
    return parse_scenario("\n".join(body), source)


def _label_of(line: str) -> str:
    head = line.split(" | ", 1)[0]
    _, sep, label = head.partition(" rule=")
    if not sep:
        raise ReplayError(f"malformed trace line {line!r}")
    return label


def _next_state(a: Config, line: str, label: str, params: Params, time: int,
                prefix: str = "") -> Config:
    if label == DEADLOCK:
        if instantaneous_successors(a, params) or 0 < max_time_elapse(a) < INF:
            raise ReplayError("deadlock step from a state that can move")
        candidates = [a]
    elif label.startswith("tick("):
        d = max_time_elapse(a)
        if label != tick_label(d) or not 0 < d < INF:
            raise ReplayError(f"{line!r}: the maximal elapse here is {d}")
        candidates = [tick(a, d)]
    else:
        candidates = [b for lab, b in instantaneous_successors(a, params) if lab == label]
    for b in candidates:
        if step_line(label, a, b, time, prefix) == line:
            return b
    raise ReplayError(f"diverged at {line!r}")


def replay_trace(text: str, source: str = "<trace>") -> tuple[ScenarioSpec, list[Config]]:
    """Re-execute a trace file; returns the scenario and the visited states.

    Raises :class:`ReplayError` on the first step the kernel cannot reproduce.
    """
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    spec = _read_header(lines, source)
    params = spec.params
    steps = [ln for ln in lines if ln and not ln.startswith("#")]
    if not steps or _label_of(steps[0]) != "init":
        raise ReplayError(f"{source}: trace must start with an init line")
    states = [build_init(spec)]
    time = 0
    cycle_at = None
    for line in steps[1:]:
        if line == CYCLE_START:
            cycle_at = len(states)
            continue
        label = _label_of(line)
        if line.startswith("loop "):
            if cycle_at is None:
                raise ReplayError(f"{source}: loop line without {CYCLE_START}")
            b = _next_state(states[-1], line, label, params, 0, prefix="loop")
            if b != states[cycle_at]:
                raise ReplayError(f"{source}: loop does not return to the cycle start")
            break
        if label.startswith("tick("):
            time += int(label[5:-1])
        states.append(_next_state(states[-1], line, label, params, time))
    return spec, states


def replay_file(path: str | Path) -> tuple[ScenarioSpec, list[Config]]:
    path = Path(path)
    return replay_trace(path.read_text(encoding="utf-8"), str(path))
