"""Explicit-state model checking of the intersection model.

The reachable state graph is built once (breadth first, states deduplicated
by value), then LTL properties are checked with a nested depth-first search
over its product with a Büchi automaton for the negated formula, and bounded
response properties with a breadth-first search over states augmented by the
age of the oldest pending obligation.
"""

from __future__ import annotations

import logging
import os
import time
from array import array
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .devices import GREEN, Params
from .kernel import (INF, Config, Msg, approach, car_light, instantaneous_successors,
                     max_time_elapse, ped_light, ped_stop, tick, tick_label)
from .ltl import (Always, And, Formula, Leadsto, Not, Or, Prop, WeakUntil, eval_lasso,
                  ltl_to_buchi, parse_formula, props)
from .scenarios import ScenarioSpec, init_spec

log = logging.getLogger(__name__)

DEFAULT_STATE_CAP = 20_000_000
DEADLOCK = "deadlock"


class StateCapExceeded(RuntimeError):
    def __init__(self, cap: int, count: int):
        super().__init__(f"state cap {cap} exceeded after {count} states")
        self.cap = cap
        self.count = count


class UnknownProposition(ValueError):
    pass


def default_state_cap() -> int:
    env = os.environ.get("CROSSLIGHT_STATE_CAP")
    return int(env) if env else DEFAULT_STATE_CAP


# --------------------------------------------------------------------------
# atomic propositions

_DIR_PROPS = {"pedLightRed", "pedArriving", "buttonPushed", "carLightRed", "carLightGreen",
              "carWaiting", "carArriving", "walking", "driving"}
_PLAIN_PROPS = {"failure", "repair"}
PROPOSITIONS = sorted(_DIR_PROPS | _PLAIN_PROPS)


def compile_prop(a: Prop, c: Config, default_xing: str | None = None) -> Callable[[Config], bool]:
    """Turn proposition ``a`` into a predicate on configurations shaped like ``c``.

    Direction propositions take ``(DIR)`` or ``("xing", DIR)``; without an
    explicit intersection the first one of ``c`` is used.
    """
    xings = c.xings() if c.objects else []
    xing = default_xing or (xings[0] if xings else "")
    args = list(a.args)
    if a.name in _DIR_PROPS:
        if len(args) == 2:
            xing = args.pop(0).strip('"')
        if len(args) != 1 or args[0] not in ("NS", "EW"):
            raise UnknownProposition(f"{a} needs a direction argument NS or EW")
        d = args[0]
    elif a.name in _PLAIN_PROPS:
        if len(args) == 1:
            xing = args[0].strip('"')
        elif args:
            raise UnknownProposition(f"{a} takes at most an intersection argument")
        d = ""
    else:
        raise UnknownProposition(f"unknown proposition {a.name!r}")
    if car_light(xing, "NS") not in c:
        raise UnknownProposition(f"unknown intersection {xing!r} in {a}")

    name = a.name
    if name in ("pedLightRed", "buttonPushed", "walking"):
        i = c.layout[ped_light(xing, d)]
        if name == "pedLightRed":
            return lambda s: s.objects[i].color == "red"
        if name == "buttonPushed":
            return lambda s: s.objects[i].button_lit
        return lambda s: s.objects[i].color in ("green", "blinking")
    if name in ("carLightRed", "carLightGreen", "driving"):
        i = c.layout[car_light(xing, d)]
        if name == "carLightRed":
            return lambda s: "red" in s.objects[i].lights
        if name == "carLightGreen":
            return lambda s: "green" in s.objects[i].lights
        return lambda s: s.objects[i].lights == GREEN
    if name == "carWaiting":
        i = c.layout[approach(xing, d)]
        return lambda s: s.objects[i].cars_present
    if name == "pedArriving":
        m = Msg("newPed", ped_stop(xing, d))
        return lambda s: m in s.messages
    if name == "carArriving":
        m = Msg("newCars", approach(xing, d))
        return lambda s: m in s.messages
    kind = "error" if name == "failure" else "repaired"
    return lambda s: any(m.kind == kind and m.to == m.about and m.to.xing == xing
                         for m in s.messages)


def eval_prop(c: Config, a: Prop | str, default_xing: str | None = None) -> bool:
    if isinstance(a, str):
        a = parse_formula(a)
        if not isinstance(a, Prop):
            raise UnknownProposition(f"{a} is not an atomic proposition")
    return compile_prop(a, c, default_xing)(c)


# --------------------------------------------------------------------------
# state graph


@dataclass
class StateGraph:
    """Reachable graph: ``succ[i]`` lists successor ids; when ``tick_dur[i] > 0``
    the last entry of ``succ[i]`` is the tick successor.  Stuck states get a
    self-loop (with ``tick_dur`` 0)."""

    params: Params
    states: list
    index: dict
    succ: list
    tick_dur: array
    stuck: set = field(default_factory=set)
    seconds: float = 0.0

    @property
    def transitions(self) -> int:
        return sum(len(s) for s in self.succ)

    def max_branching(self) -> int:
        return max((len(s) for s in self.succ), default=0)

    def label(self, fs: Sequence[Prop]) -> list[int]:
        """Bitmask of the propositions ``fs`` (bit i for ``fs[i]``) per state."""
        if not self.states:
            return []
        preds = [compile_prop(a, self.states[0]) for a in fs]
        out = []
        for s in self.states:
            m = 0
            for bit, pred in enumerate(preds):
                if pred(s):
                    m |= 1 << bit
            out.append(m)
        return out

    def step_label(self, i: int, j: int) -> str:
        """Rule label of some transition from state ``i`` to state ``j``."""
        if i in self.stuck and i == j:
            return DEADLOCK
        return transition_label(self.states[i], self.states[j], self.params)


def transition_label(a: Config, b: Config, params: Params) -> str:
    for label, nxt in instantaneous_successors(a, params):
        if nxt == b:
            return label
    d = max_time_elapse(a)
    if 0 < d < INF and tick(a, d) == b:
        return tick_label(d)
    if a == b and not instantaneous_successors(a, params) and d in (0, INF):
        return DEADLOCK
    raise ValueError("no transition between the given states")


def build_state_graph(init: Config, params: Params, state_cap: int | None = None) -> StateGraph:
    cap = default_state_cap() if state_cap is None else state_cap
    t0 = time.perf_counter()
    states = [init]
    index = {init: 0}
    succ: list = []
    tick_dur = array("i")
    stuck = set()
    i = 0
    while i < len(states):
        c = states[i]
        ids = []
        for _, nxt in instantaneous_successors(c, params):
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(states)
                states.append(nxt)
            ids.append(j)
        d = max_time_elapse(c)
        if 0 < d < INF:
            nxt = tick(c, d)
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(states)
                states.append(nxt)
            ids.append(j)
            tick_dur.append(int(d))
        else:
            tick_dur.append(0)
        if not ids:
            stuck.add(i)
            ids.append(i)
        succ.append(tuple(ids))
        if len(states) > cap:
            raise StateCapExceeded(cap, len(states))
        i += 1
        if i % 200_000 == 0:
            log.info("explored %d states, %d queued", i, len(states) - i)
    return StateGraph(params, states, index, succ, tick_dur, stuck,
                      time.perf_counter() - t0)


# --------------------------------------------------------------------------
# verdicts


@dataclass
class Step:
    label: str
    state: Config
    time: int


@dataclass
class Verdict:
    holds: bool
    prefix: list = field(default_factory=list)
    cycle: list = field(default_factory=list)
    loop_label: str = ""
    states: int = 0
    transitions: int = 0
    seconds: float = 0.0

    def __bool__(self) -> bool:
        return self.holds

    @property
    def name(self) -> str:
        return "holds" if self.holds else "violated"

    def trace(self) -> list[Step]:
        return list(self.prefix) + list(self.cycle)


def _steps(graph: StateGraph, ids: Sequence[int], start_label: str = "init",
           start_time: int = 0, prev: int | None = None) -> list[Step]:
    out = []
    t = start_time
    for k, i in enumerate(ids):
        j = prev if k == 0 else ids[k - 1]
        if j is None:
            label = start_label
        else:
            label = graph.step_label(j, i)
            if label.startswith("tick("):
                t += int(label[5:-1])
        out.append(Step(label, graph.states[i], t))
    return out


def _lasso_verdict(graph: StateGraph, prefix: list[int], cycle: list[int]) -> Verdict:
    pre = _steps(graph, prefix)
    cyc = _steps(graph, cycle, prev=prefix[-1] if prefix else None,
                 start_time=pre[-1].time if pre else 0)
    loop = graph.step_label(cycle[-1], cycle[0]) if cycle else ""
    return Verdict(False, pre, cyc, loop)


# --------------------------------------------------------------------------
# LTL


def _nested_dfs(succ: list, labels: list[int], ba, prop_bits: dict):
    """Search the product for a reachable accepting cycle.

    Returns ``None`` or ``(prefix, cycle)`` as lists of graph state ids.
    """
    nq = len(ba.states)
    if nq == 0:
        return None
    pos = [sum(1 << prop_bits[a] for a in ba.pos[q]) for q in range(nq)]
    neg = [sum(1 << prop_bits[a] for a in ba.neg[q]) for q in range(nq)]
    qsucc = [tuple(ba.succ[q]) for q in range(nq)]
    accepting = bytearray(nq)
    for q in ba.accepting:
        accepting[q] = 1

    def psucc(v: int) -> list[int]:
        s, q = divmod(v, nq)
        out = []
        for s2 in succ[s]:
            lab = labels[s2]
            for q2 in qsucc[q]:
                if lab & pos[q2] == pos[q2] and not lab & neg[q2]:
                    out.append(s2 * nq + q2)
        return out

    n = len(succ) * nq
    VISITED, ONSTACK, FLAGGED = 1, 2, 4
    mark = bytearray(n)
    lab0 = labels[0]
    roots = [q for q in ba.initial if lab0 & pos[q] == pos[q] and not lab0 & neg[q]]
    for root in roots:
        if mark[root] & VISITED:
            continue
        mark[root] |= VISITED | ONSTACK
        path = [root]
        iters = [iter(psucc(root))]
        while iters:
            w = next(iters[-1], None)
            if w is not None:
                if not mark[w] & VISITED:
                    mark[w] |= VISITED | ONSTACK
                    path.append(w)
                    iters.append(iter(psucc(w)))
                continue
            v = path[-1]
            if accepting[v % nq]:
                found = _inner_dfs(v, psucc, mark, ONSTACK, FLAGGED)
                if found is not None:
                    k = path.index(found[-1])
                    cycle = path[k:] + found[:-1]
                    return [x // nq for x in path[:k]], [x // nq for x in cycle]
            mark[v] &= ~ONSTACK
            path.pop()
            iters.pop()
    return None


def _inner_dfs(seed: int, psucc, mark: bytearray, ONSTACK: int, FLAGGED: int):
    """Path from ``seed`` (exclusive) to a state on the outer stack (inclusive)."""
    path = []
    iters = [iter(psucc(seed))]
    while iters:
        w = next(iters[-1], None)
        if w is None:
            iters.pop()
            if path:
                path.pop()
            continue
        if mark[w] & ONSTACK:
            return path + [w]
        if not mark[w] & FLAGGED:
            mark[w] |= FLAGGED
            path.append(w)
            iters.append(iter(psucc(w)))
    return None


def check_ltl_structure(succ: Sequence[Sequence[int]], valuation: Sequence,
                        f: Formula) -> tuple[list[int], list[int]] | None:
    """Check ``f`` on a Kripke structure with initial state 0.

    ``valuation[i]`` is the set of propositions true in state ``i``; every
    state needs at least one successor.  Returns ``None`` when ``f`` holds,
    otherwise a ``(prefix, cycle)`` lasso of state ids.
    """
    ps = sorted(props(f), key=str)
    bits = {a: i for i, a in enumerate(ps)}
    labels = [sum(1 << bits[a] for a in v if a in bits) for v in valuation]
    return _nested_dfs(succ, labels, ltl_to_buchi(Not(f)), bits)


def check_ltl_graph(graph: StateGraph, f: Formula) -> Verdict:
    """Check ``f`` on every path of an already built state graph."""
    t0 = time.perf_counter()
    ps = sorted(props(f), key=str)
    labels = graph.label(ps)
    ba = ltl_to_buchi(Not(f))
    found = _nested_dfs(graph.succ, labels, ba, {a: i for i, a in enumerate(ps)})
    if found is None:
        v = Verdict(True)
    else:
        v = _lasso_verdict(graph, *found)
    v.states, v.transitions = len(graph.states), graph.transitions
    v.seconds = graph.seconds + time.perf_counter() - t0
    return v


def model_check_ltl(init: Config, f: Formula | str, params: Params | None = None,
                    state_cap: int | None = None) -> Verdict:
    if isinstance(f, str):
        f = parse_formula(f)
    for a in props(f):
        compile_prop(a, init)
    graph = build_state_graph(init, params or Params(), state_cap)
    return check_ltl_graph(graph, f)


# --------------------------------------------------------------------------
# bounded response


def check_bounded_response_graph(graph: StateGraph, p: Prop, q: Prop, bound: int) -> Verdict:
    """Every ``p`` state is followed by a ``q`` state within ``bound`` time units.

    Search states are ``(graph state, age)`` where ``age`` is the time since
    the oldest undischarged ``p`` (or ``-1`` when nothing is pending).  A tick
    that pushes the age past ``bound``, or a state where time may pass for
    ever with an obligation pending, is a violation.
    """
    if bound == INF or bound < 0:
        raise ValueError("bound must be a finite non-negative time")
    t0 = time.perf_counter()
    labels = graph.label([p, q])
    width = bound + 2
    succ, tick_dur = graph.succ, graph.tick_dur
    stuck = graph.stuck

    def settle(s: int, age: int) -> int:
        lab = labels[s]
        if lab & 2:
            return -1
        if lab & 1 and age < 0:
            return 0
        return age

    start = settle(0, -1)
    key0 = start + 1
    parent = {key0: None}
    frontier = [key0]
    bad = None
    while frontier and bad is None:
        nxt = []
        for key in frontier:
            s, a = divmod(key, width)
            age = a - 1
            if age >= 0 and s in stuck and max_time_elapse(graph.states[s]) == INF:
                bad = (key, None)
                break
            ids = succ[s]
            d = tick_dur[s]
            last = len(ids) - 1
            for k, s2 in enumerate(ids):
                if d and k == last and age >= 0:
                    new_age = age + d
                    if new_age > bound:
                        bad = (key, s2)
                        break
                else:
                    new_age = age
                key2 = s2 * width + settle(s2, new_age) + 1
                if key2 not in parent:
                    parent[key2] = key
                    nxt.append(key2)
            if bad is not None:
                break
        frontier = nxt
    seconds = graph.seconds + time.perf_counter() - t0
    if bad is None:
        v = Verdict(True)
    else:
        key, last_state = bad
        ids = []
        while key is not None:
            ids.append(key // width)
            key = parent[key]
        ids.reverse()
        if last_state is not None:
            ids.append(last_state)
        v = Verdict(False, _steps(graph, ids))
    v.states, v.transitions, v.seconds = len(graph.states), graph.transitions, seconds
    return v


def check_bounded_response(init: Config, p: Prop | str, q: Prop | str, bound: int,
                           params: Params | None = None,
                           state_cap: int | None = None) -> Verdict:
    p = parse_formula(p) if isinstance(p, str) else p
    q = parse_formula(q) if isinstance(q, str) else q
    for a in (p, q):
        if not isinstance(a, Prop):
            raise UnknownProposition(f"{a} is not an atomic proposition")
        compile_prop(a, init)
    graph = build_state_graph(init, params or Params(), state_cap)
    return check_bounded_response_graph(graph, p, q, bound)


# --------------------------------------------------------------------------
# property catalog


def _pedestrian_stays_red(d: str) -> Formula:
    red, pushed, arriving = (Prop(n, (d,)) for n in ("pedLightRed", "buttonPushed",
                                                      "pedArriving"))
    return Leadsto(And(red, Not(pushed)), WeakUntil(red, arriving))


P1 = And(_pedestrian_stays_red("EW"), _pedestrian_stays_red("NS"))
P2 = Leadsto(
    And(And(Prop("carLightRed", ("NS",)), Not(Prop("buttonPushed", ("NS",)))),
        Not(Prop("carWaiting", ("NS",)))),
    WeakUntil(Prop("carLightRed", ("NS",)),
              Or(Prop("pedArriving", ("NS",)), Prop("carArriving", ("NS",)))))
P3 = parse_formula("([] (failure -> <> repair)) -> "
                   "(([] <> carArriving(NS)) -> ([] <> carLightGreen(NS)))")
P4 = parse_formula("[] ((~ (walking(NS) /\\ driving(EW))) /\\ (~ (walking(EW) /\\ driving(NS))))")
P4X = Always(Not(And(Prop("driving", ("NS",)), Prop("driving", ("EW",)))))
P5_TRIGGER = Prop("pedArriving", ("NS",))
P5_RESPONSE = Prop("walking", ("NS",))
P5_BOUND = 15

CATALOG = {"P1": P1, "P2": P2, "P3": P3, "P4": P4, "P4x": P4X}

# init(XING, minGreenTime + 2, minRedTime, T, CARF, PEDF, N1, N2) with default parameters
CATALOG_SCENARIOS = {
    "P1": init_spec("Spitsbergen", 5, 6, 2, 0, 0, 1, 1),
    "P2": init_spec("Spitsbergen", 5, 6, 2, 0, 0, 1, 1),
    "P3": init_spec("Spitsbergen", 5, 6, 0, 1, 0, 2, 9),
    "P4": init_spec("Spitsbergen", 5, 6, 0, 1, 0, 2, 9),
    "P4x": init_spec("Spitsbergen", 5, 6, 0, 1, 0, 2, 9),
    "P5": init_spec("Spitsbergen", 5, 6, 0, 0, 0, 1, 1),
}


def check_property_catalog(init: Config, name: str, tau: int | None = None,
                           params: Params | None = None, state_cap: int | None = None,
                           graph: StateGraph | None = None) -> Verdict:
    key = {k.lower(): k for k in (*CATALOG, "P5")}.get(name.lower())
    if key is None:
        raise KeyError(f"unknown catalog property {name!r}; known: {', '.join(CATALOG)}, P5")
    if graph is None:
        graph = build_state_graph(init, params or Params(), state_cap)
    if key == "P5":
        return check_bounded_response_graph(graph, P5_TRIGGER, P5_RESPONSE,
                                            P5_BOUND if tau is None else tau)
    return check_ltl_graph(graph, CATALOG[key])


# --------------------------------------------------------------------------
# replay


class ReplayError(AssertionError):
    pass


def replay_verdict(v: Verdict, params: Params, init: Config | None = None) -> None:
    """Re-execute a counterexample through the kernel; raise on divergence."""
    steps = v.trace()
    if not steps:
        return
    if init is not None and steps[0].state != init:
        raise ReplayError("trace does not start in the initial state")
    for a, b in zip(steps, steps[1:]):
        _check_step(a.state, b.label, b.state, params)
    if v.cycle:
        _check_step(v.cycle[-1].state, v.loop_label, v.cycle[0].state, params)


def _check_step(a: Config, label: str, b: Config, params: Params) -> None:
    if label == DEADLOCK:
        if a != b or instantaneous_successors(a, params) or 0 < max_time_elapse(a) < INF:
            raise ReplayError("deadlock step from a state that can move")
        return
    if label.startswith("tick("):
        d = int(label[5:-1])
        if d != max_time_elapse(a) or tick(a, d) != b:
            raise ReplayError(f"tick step {label} diverges")
        return
    if not any(lab == label and nxt == b for lab, nxt in instantaneous_successors(a, params)):
        raise ReplayError(f"no {label} transition reaches the recorded state")


def lasso_violates(v: Verdict, f: Formula) -> bool:
    """Whether the counterexample lasso of ``v`` falsifies ``f``."""
    if not v.cycle:
        raise ValueError("verdict has no cycle")
    first = v.prefix[0].state if v.prefix else v.cycle[0].state
    preds = {a: compile_prop(a, first) for a in props(f)}
    return not eval_lasso(f, [s.state for s in v.prefix], [s.state for s in v.cycle],
                          lambda a, s: preds[a](s))


def catalog_spec(name: str) -> ScenarioSpec:
    key = {k.lower(): k for k in CATALOG_SCENARIOS}.get(name.lower())
    if key is None:
        raise KeyError(f"unknown catalog property {name!r}")
    return CATALOG_SCENARIOS[key]
