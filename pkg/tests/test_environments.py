from __future__ import annotations

from crosslight.devices import Params
from crosslight.environments import EmergencyEnv, FailureEnv, PeriodicEnv, failure_env_oid
from crosslight.kernel import NS, Msg, Oid, car_light
from crosslight.scenarios import cars_and_peds

P = Params()


def fire(env):
    return list(env.fire(None, P))


def test_periodic_env_emits_every_subset():
    env = cars_and_peds("X")
    out = fire(env)
    assert len(out) == 16
    subsets = {frozenset(emitted) for _, _, emitted in out}
    assert len(subsets) == 16
    empty = [u for _, u, e in out if not e]
    assert empty == [(env._replace(time_to_next_events=1),)]


def test_periodic_env_waits_for_its_timer():
    assert fire(cars_and_peds("X")._replace(time_to_next_events=1)) == []


def test_periodic_env_with_duplicate_events():
    m = Msg("newCars", Oid("approach", "X", NS))
    env = PeriodicEnv(Oid("envCarsPeds", "X"), 2, 0, (m, m))
    assert len(fire(env)) == 3


def test_emergency_env_alternates():
    env = EmergencyEnv(Oid("envEmergency", "X"), 3)
    skip, emit = fire(env)
    assert skip[0] == "skipEmergencyDecision"
    assert skip[1][0].emergency_on is False and skip[2] == ()
    assert emit[0] == "emergencyXing" and emit[1][0].emergency_on
    assert emit[1][0].time_to_next_events == 3
    _, emit2 = fire(emit[1][0]._replace(time_to_next_events=0))
    assert emit2[0] == "emergencyOverXing" and not emit2[1][0].emergency_on


def test_failure_env_targets_its_device():
    dev = car_light("X", NS)
    env = FailureEnv(failure_env_oid(dev), 2, 9)
    assert env.device == dev
    skip, fail = fire(env)
    assert skip[1][0].timer == 2
    assert fail[2] == (Msg("error", dev, about=dev),)
    down = fail[1][0]
    assert (down.phase, down.timer) == ("down", 2)
    _, repair = fire(down._replace(timer=0))
    assert repair[2] == (Msg("repaired", dev, about=dev),)
    assert (repair[1][0].phase, repair[1][0].timer) == ("up", 9)


def test_failure_env_advance():
    env = FailureEnv(failure_env_oid(car_light("X", NS)), 2, 9, "up", 5)
    assert env.advance(3).timer == 2
    assert env.advance(9).timer == 0
