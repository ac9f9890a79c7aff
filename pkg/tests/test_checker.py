from __future__ import annotations

import random

import pytest

from crosslight.checker import (CATALOG_SCENARIOS, DEADLOCK, P5_RESPONSE, P5_TRIGGER, ReplayError,
                                StateCapExceeded, UnknownProposition, Verdict,
                                build_state_graph, check_bounded_response,
                                check_bounded_response_graph, check_ltl_graph,
                                check_ltl_structure, eval_prop, lasso_violates,
                                model_check_ltl, replay_verdict)
from crosslight.devices import Params, PedLight
from crosslight.kernel import (NS, Config, Msg, approach, max_time_elapse, ped_light, ped_stop,
                               tick)
from crosslight.ltl import FALSE, Always, Eventually, Not, Prop, parse_formula
from crosslight.scenarios import build_init, init

from oracle import brute_force_holds, holds_at, lasso_words, pattern_formulas, random_structure

P = Params()


@pytest.fixture(scope="module")
def p5_graph():
    init_state = build_init(CATALOG_SCENARIOS["P5"])
    return init_state, build_state_graph(init_state, P)


def test_fresh_state_propositions():
    c = init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1)
    assert eval_prop(c, "pedLightRed(NS)")
    assert not eval_prop(c, "walking(NS)")
    assert eval_prop(c, "driving(NS)") and eval_prop(c, "carLightGreen(NS)")
    assert eval_prop(c, "carLightRed(EW)") and not eval_prop(c, "carWaiting(EW)")
    assert not eval_prop(c, "failure")


def test_message_propositions():
    c = init("Spitsbergen", 5, 6, 0, 1, 0, 1, 1)
    c = c.rewrite((), None, [Msg("newPed", ped_stop("Spitsbergen", NS)),
                             Msg("newCars", approach("Spitsbergen", NS))])
    assert eval_prop(c, "pedArriving(NS)") and not eval_prop(c, "pedArriving(EW)")
    assert eval_prop(c, "carArriving(NS)")
    dev = ped_light("Spitsbergen", NS)
    assert eval_prop(c.rewrite((), None, [Msg("error", dev, about=dev)]), "failure")
    # a notification to a sibling is not a failure event
    other = ped_light("Spitsbergen", "EW")
    assert not eval_prop(c.rewrite((), None, [Msg("error", other, about=dev)]), "failure")
    assert eval_prop(c.rewrite((), None, [Msg("repaired", dev, about=dev)]), "repair")


def test_blinking_counts_as_walking():
    c = init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1)
    c = c.replace_objects(PedLight(ped_light("Spitsbergen", NS), 2, "blinking"))
    assert eval_prop(c, "walking(NS)")
    assert not eval_prop(c, "pedLightRed(NS)")


@pytest.mark.parametrize("text", ["walking(XX)", "walking", "flying(NS)",
                                  'walking("Nowhere", NS)', "failure(a, b)"])
def test_unknown_propositions(text):
    with pytest.raises(UnknownProposition):
        eval_prop(init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1), text)


def test_graph_shape(p5_graph):
    _, g = p5_graph
    assert len(g.states) == 20368
    assert g.transitions == 69772
    assert not g.stuck
    for i in range(0, len(g.states), 97):
        s = g.states[i]
        if s.messages:
            assert g.tick_dur[i] == 0
        d = max_time_elapse(s)
        if g.tick_dur[i]:
            assert g.states[g.succ[i][-1]] == tick(s, d)


def test_graph_is_deterministic():
    c = init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1)
    a, b = build_state_graph(c, P), build_state_graph(c, P)
    assert a.states == b.states and a.succ == b.succ


def test_emergency_env_grows_the_state_space():
    base = build_state_graph(init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1), P)
    more = build_state_graph(init("Spitsbergen", 5, 6, 7, 0, 0, 1, 1), P)
    assert len(more.states) > len(base.states)


def test_stuck_states_get_self_loops():
    objs = [PedLight(ped_light("X", NS))]
    g = build_state_graph(Config.of(objs), P)
    assert g.succ == [(0,)] and g.stuck == {0}
    v = check_ltl_graph(g, Always(FALSE))
    assert not v.holds and v.loop_label == DEADLOCK
    assert {s.state for s in v.trace()} == {g.states[0]}
    replay_verdict(v, P, g.states[0])


def test_state_cap():
    with pytest.raises(StateCapExceeded) as info:
        build_state_graph(init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1), P, state_cap=500)
    assert info.value.count > 500


def test_state_cap_from_environment(monkeypatch):
    monkeypatch.setenv("CROSSLIGHT_STATE_CAP", "300")
    with pytest.raises(StateCapExceeded):
        build_state_graph(init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1), P)


def test_always_false_is_violated(p5_graph):
    _, g = p5_graph
    v = check_ltl_graph(g, Always(FALSE))
    assert not v.holds
    assert not lasso_violates(v, Not(Always(FALSE)))


def test_violation_replays_and_falsifies(p5_graph):
    init_state, g = p5_graph
    f = parse_formula("[] <> walking(NS)")
    v = check_ltl_graph(g, f)
    assert not v.holds and v.cycle
    replay_verdict(v, P, init_state)
    assert lasso_violates(v, f)


def test_tampered_trace_does_not_replay(p5_graph):
    init_state, g = p5_graph
    v = check_ltl_graph(g, parse_formula("[] <> walking(NS)"))
    bad = Verdict(False, list(v.prefix), list(v.cycle), v.loop_label)
    bad.prefix[3], bad.prefix[4] = bad.prefix[4], bad.prefix[3]
    with pytest.raises(ReplayError):
        replay_verdict(bad, P, init_state)


def test_model_check_rejects_unknown_props():
    with pytest.raises(UnknownProposition):
        model_check_ltl(init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1), "[] flying(NS)")


def test_verdict_independent_of_construction_order():
    c = init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1)
    shuffled = list(c.objects)
    random.Random(4).shuffle(shuffled)
    c2 = Config.of(shuffled)
    f = parse_formula("[] ~ (driving(NS) /\\ driving(EW))")
    assert model_check_ltl(c, f).holds == model_check_ltl(c2, f).holds is True


def test_oracle_equivalence_sample():
    rng = random.Random(11)
    for _ in range(200):
        succ, val = random_structure(rng)
        words = lasso_words(succ, val)
        for f in pattern_formulas(rng):
            found = check_ltl_structure(succ, val, f)
            assert (found is None) == brute_force_holds(succ, val, f, words=words), (succ, val, f)
            if found is not None:
                prefix, cycle = found
                word = [val[s] for s in prefix + cycle]
                assert not holds_at(f, word, len(prefix))
                assert all(t in succ[s] for s, t in zip(prefix + cycle, (prefix + cycle)[1:]))
                assert cycle[0] in succ[cycle[-1]]
                assert (prefix + cycle)[0] == 0


def test_bounded_response_zero_bound_same_prop(p5_graph):
    _, g = p5_graph
    p = Prop("pedLightRed", ("NS",))
    assert check_bounded_response_graph(g, p, p, 0).holds


def test_bounded_response_is_monotone(p5_graph):
    _, g = p5_graph
    verdicts = [check_bounded_response_graph(g, P5_TRIGGER, P5_RESPONSE, t).holds
                for t in range(0, 19, 3)]
    assert verdicts == sorted(verdicts)
    assert verdicts[0] is False and verdicts[-1] is True


def test_bounded_response_counterexample_is_sound(p5_graph):
    init_state, g = p5_graph
    v = check_bounded_response_graph(g, P5_TRIGGER, P5_RESPONSE, 14)
    assert not v.holds and not v.cycle
    replay_verdict(v, P, init_state)
    steps = v.prefix
    trig = [eval_prop(s.state, P5_TRIGGER) for s in steps]
    resp = [eval_prop(s.state, P5_RESPONSE) for s in steps]
    # some trigger is pending with no response for more than 14 time units
    start = max(i for i, t in enumerate(trig) if t and not any(resp[i:]))
    assert steps[-1].time - steps[start].time > 14


def test_bounded_response_rejects_compound_props():
    with pytest.raises(UnknownProposition):
        check_bounded_response(init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1),
                               "walking(NS) /\\ driving(NS)", "walking(NS)", 3)


def test_bounded_response_rejects_negative_bound(p5_graph):
    _, g = p5_graph
    with pytest.raises(ValueError):
        check_bounded_response_graph(g, P5_TRIGGER, P5_RESPONSE, -1)


def test_eventually_walking_holds_on_some_but_not_all_paths(p5_graph):
    _, g = p5_graph
    assert not check_ltl_graph(g, Eventually(P5_RESPONSE)).holds
    assert check_ltl_graph(g, Not(Always(P5_RESPONSE))).holds
