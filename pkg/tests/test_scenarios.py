from __future__ import annotations

import pytest

from crosslight.devices import GREEN, RED, CarLight, Params, PedLight
from crosslight.environments import EmergencyEnv, FailureEnv, PeriodicEnv
from crosslight.kernel import EW, INF, NS, car_light, ped_light
from crosslight.scenarios import (ScenarioError, ScenarioSpec, build_init, format_scenario, init,
                                  parse_scenario, read_scenario)


def test_initial_lights():
    c = init("Spitsbergen", 5, 6, 0, 0, 0, 1, 1)
    ns = c.get(car_light("Spitsbergen", NS))
    ew = c.get(car_light("Spitsbergen", EW))
    assert (ns.lights, ns.timer, ns.state, ns.default_starter) == (GREEN, 5, "green", True)
    assert (ew.lights, ew.timer, ew.state, ew.default_starter) == (RED, 4, "red", False)
    assert (ew.red_time, ew.green_time) == (8, 3)
    assert ns.round_time == ew.round_time == 11
    for d in (NS, EW):
        pl = c.get(ped_light("Spitsbergen", d))
        assert (pl.color, pl.timer, pl.button_lit) == ("red", INF, False)


def test_exactly_one_starter_per_intersection():
    spec = ScenarioSpec(extra_intersections=(("Other", 4, 7),))
    c = build_init(spec)
    for x in ("Spitsbergen", "Other"):
        starters = [o for o in c.objects if isinstance(o, CarLight) and o.oid.xing == x
                    and o.default_starter]
        assert len(starters) == 1


def test_environment_composition():
    c = init("X", 5, 6, 3, 2, 1, 2, 9)
    kinds = [type(o) for o in c.objects]
    assert kinds.count(PeriodicEnv) == 1
    assert kinds.count(EmergencyEnv) == 1
    fails = [o for o in c.objects if isinstance(o, FailureEnv)]
    assert sorted(f.device for f in fails) == sorted(
        [car_light("X", NS), car_light("X", EW), ped_light("X", EW)])
    assert all((f.frequency, f.min_separation) == (2, 9) for f in fails)


def test_no_emergency_env_when_period_zero():
    c = init("X", 5, 6, 0, 0, 0, 1, 1)
    assert not any(isinstance(o, EmergencyEnv) for o in c.objects)


@pytest.mark.parametrize("green,red", [(2, 6), (5, 5)])
def test_light_time_minimums(green, red):
    with pytest.raises(ScenarioError):
        init("X", green, red, 0, 0, 0, 1, 1)


def test_bad_fault_counts():
    with pytest.raises(ScenarioError):
        init("X", 5, 6, 0, 3, 0, 1, 1)


SCENARIO = """\
# p1 scenario
xing = Spitsbergen
green_time = 5
red_time = 6
emergency_period = 2   # emergencies every 2 units
regime = european
intersection = Nord, 4, 7
"""


def test_parse_scenario():
    spec = parse_scenario(SCENARIO)
    assert spec.emergency_period == 2
    assert spec.params == Params(regime="european")
    assert spec.extra_intersections == (("Nord", 4, 7),)
    assert parse_scenario(format_scenario(spec)) == spec


def test_scenario_file(tmp_path):
    path = tmp_path / "p1.scn"
    path.write_text(SCENARIO)
    assert read_scenario(path).xing == "Spitsbergen"


@pytest.mark.parametrize("text,where", [
    ("green_time = 5\nbogus = 1\n", ":2"),
    ("green_time = five\n", ":1"),
    ("xing Spitsbergen\n", ":1"),
    ("regime = swiss\n", ":1"),
])
def test_scenario_errors_carry_position(text, where):
    with pytest.raises(ScenarioError, match=f"scn{where}"):
        parse_scenario(text, "scn")


def test_scenario_defaults_are_valid():
    spec = parse_scenario("")
    assert spec == ScenarioSpec()
    assert isinstance(build_init(spec).get(ped_light("Spitsbergen", NS)), PedLight)
