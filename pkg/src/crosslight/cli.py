"""Command-line front end.

Exit codes: 0 holds (or success), 1 violated, 2 input or resource error.
"""

from __future__ import annotations

import argparse
import resource
import sys
import time
from pathlib import Path

from .checker import (CATALOG, P5_BOUND, P5_RESPONSE, P5_TRIGGER, ReplayError,
                      StateCapExceeded, UnknownProposition, build_state_graph,
                      catalog_spec, check_bounded_response_graph, check_ltl_graph,
                      compile_prop)
from .devices import Params
from .ltl import FormulaSyntaxError, Prop, parse_formula, props
from .scenarios import ScenarioError, ScenarioSpec, build_init, init_spec, read_scenario
from .simulation import random_run
from .traces import format_trace, replay_file, write_trace

EXIT_HOLDS, EXIT_VIOLATED, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _peak_mb() -> int:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss // 1024


def _scenario(args, default: ScenarioSpec | None = None) -> ScenarioSpec:
    if args.scenario and args.init:
        raise UsageError("give either --scenario or --init, not both")
    if args.scenario:
        spec = read_scenario(args.scenario)
    elif args.init:
        parts = [p.strip() for p in args.init.split(",")]
        if len(parts) != 8:
            raise UsageError("--init takes XING,GREEN,RED,T,CARF,PEDF,N1,N2")
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError as exc:
            raise UsageError(f"--init: {exc}") from exc
        spec = init_spec(parts[0].strip('"'), *nums, params=Params(regime=args.regime))
    elif default is not None:
        spec = default
    else:
        raise UsageError("a scenario is required (--scenario FILE or --init ...)")
    spec.validate()
    return spec


def _parse(text: str, what: str):
    try:
        return parse_formula(text)
    except FormulaSyntaxError as exc:
        raise UsageError(f"{what}: {exc}\n  {text}\n  {' ' * exc.pos}^") from exc


def _parse_prop(text: str, what: str) -> Prop:
    f = _parse(text, what)
    if not isinstance(f, Prop):
        raise UsageError(f"{what}: expected an atomic proposition, got {f}")
    return f


def _report(out, **fields) -> None:
    for k, v in fields.items():
        if v is not None:
            print(f"{k}: {v}", file=out)


def _summary(out, verdict: str, states: int | str) -> None:
    print(f"VERDICT={verdict} STATES={states}", file=out)


def _emit_verdict(args, spec, v, graph, started, out, formula_text) -> int:
    seconds = time.perf_counter() - started
    _report(out, scenario=spec.xing, formula=formula_text, verdict=v.name,
            states=len(graph.states), transitions=graph.transitions,
            seconds=f"{seconds:.2f}", peak_memory_mb=_peak_mb())
    if not v.holds:
        path = args.trace_out or "counterexample.trace"
        text = format_trace(spec, v.prefix, v.cycle, v.loop_label,
                            comments=[f"formula: {formula_text}", f"verdict: {v.name}"])
        write_trace(path, text)
        _report(out, trace=path, trace_steps=len(v.prefix) + len(v.cycle))
    _summary(out, v.name, len(graph.states))
    return EXIT_HOLDS if v.holds else EXIT_VIOLATED


def _build(spec: ScenarioSpec, args):
    init = build_init(spec)
    return init, build_state_graph(init, spec.params, args.state_cap)


def cmd_mc(args, out) -> int:
    if bool(args.property) == bool(args.formula):
        raise UsageError("give exactly one of --property or --formula")
    if args.property:
        name = {k.lower(): k for k in CATALOG}.get(args.property.lower())
        if name is None:
            if args.property.lower() == "p5":
                raise UsageError("P5 is a bounded response check; use the br command")
            raise UsageError(f"unknown property {args.property!r}; known: {', '.join(CATALOG)}")
        f = CATALOG[name]
        spec = _scenario(args, catalog_spec(name))
        text = f"{name} = {f}"
    else:
        f = _parse(args.formula, "--formula")
        spec = _scenario(args)
        text = str(f)
    started = time.perf_counter()
    init = build_init(spec)
    for a in props(f):
        compile_prop(a, init)
    init, graph = _build(spec, args)
    v = check_ltl_graph(graph, f)
    return _emit_verdict(args, spec, v, graph, started, out, text)


def cmd_br(args, out) -> int:
    p = _parse_prop(args.p, "p") if args.p else P5_TRIGGER
    q = _parse_prop(args.q, "q") if args.q else P5_RESPONSE
    tau = P5_BOUND if args.tau is None else args.tau
    if tau < 0:
        raise UsageError("--tau must be non-negative")
    spec = _scenario(args, catalog_spec("P5"))
    started = time.perf_counter()
    init = build_init(spec)
    for a in (p, q):
        compile_prop(a, init)
    init, graph = _build(spec, args)
    v = check_bounded_response_graph(graph, p, q, tau)
    return _emit_verdict(args, spec, v, graph, started, out, f"{p} => <>le({tau}) {q}")


def cmd_simulate(args, out) -> int:
    spec = _scenario(args)
    run = random_run(build_init(spec), spec.params, args.steps, args.seed)
    text = format_trace(spec, run, comments=[f"seed: {args.seed}", f"steps: {args.steps}"])
    if args.trace_out:
        write_trace(args.trace_out, text)
        _report(out, trace=args.trace_out, steps=len(run) - 1, time=run[-1].time)
    else:
        out.write(text)
    return EXIT_HOLDS


def cmd_stats(args, out) -> int:
    spec = _scenario(args)
    started = time.perf_counter()
    _, graph = _build(spec, args)
    _report(out, scenario=spec.xing, states=len(graph.states),
            transitions=graph.transitions, max_branching=graph.max_branching,
            deadlocks=len(graph.stuck), seconds=f"{time.perf_counter() - started:.2f}",
            peak_memory_mb=_peak_mb())
    print(f"STATES={len(graph.states)} TRANSITIONS={graph.transitions}", file=out)
    return EXIT_HOLDS


def cmd_replay(path: str, out) -> int:
    spec, states = replay_file(path)
    _report(out, replay=path, scenario=spec.xing, steps=len(states) - 1, result="ok")
    return EXIT_HOLDS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosslight",
        description="Model checking and simulation of a pedestrian crossing controller.")
    parser.add_argument("--replay", metavar="FILE",
                        help="re-execute a trace file through the kernel and exit")
    sub = parser.add_subparsers(dest="command")

    def common(p, with_cap=True):
        p.add_argument("--scenario", metavar="FILE", help="scenario file (key = value lines)")
        p.add_argument("--init", metavar="XING,GREEN,RED,T,CARF,PEDF,N1,N2",
                       help="inline initial state arguments")
        p.add_argument("--regime", choices=("american", "european"), default="american",
                       help="light sequence for --init scenarios")
        if with_cap:
            p.add_argument("--state-cap", type=int, default=None,
                           help="abort after this many states (default from "
                                "CROSSLIGHT_STATE_CAP or 20000000)")
            p.add_argument("--threads", type=int, default=1,
                           help="accepted for compatibility; exploration is sequential")
        p.add_argument("--trace-out", metavar="FILE", help="where to write the trace")

    mc = sub.add_parser("mc", help="check an LTL formula or a catalog property")
    common(mc)
    mc.add_argument("--property", help="catalog property: P1, P2, P3, P4, P4x")
    mc.add_argument("--formula", help="LTL formula text")

    br = sub.add_parser("br", help="check bounded response p => <>le(tau) q")
    common(br)
    br.add_argument("p", nargs="?", help="trigger proposition (default pedArriving(NS))")
    br.add_argument("q", nargs="?", help="response proposition (default walking(NS))")
    br.add_argument("--tau", type=int, default=None, help=f"time bound (default {P5_BOUND})")

    sim = sub.add_parser("simulate", help="one seeded random run")
    common(sim, with_cap=False)
    sim.add_argument("--steps", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)

    st = sub.add_parser("stats", help="reachable state-space statistics")
    common(st)
    return parser


COMMANDS = {"mc": cmd_mc, "br": cmd_br, "simulate": cmd_simulate, "stats": cmd_stats}


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.replay:
            return cmd_replay(args.replay, out)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_ERROR
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be at least 1")
        if getattr(args, "steps", 1) < 1:
            raise UsageError("--steps must be at least 1")
        return COMMANDS[args.command](args, out)
    except (UsageError, ScenarioError, UnknownProposition, StateCapExceeded, ReplayError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _summary(out, "error", getattr(exc, "count", 0))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
