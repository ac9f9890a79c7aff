"""Car light, pedestrian light and car approach sensor controllers.

Every rule is a method on the immutable state of the object that owns it.
``fire`` covers timer expiry and spontaneous rules, ``receive`` covers rules
that consume a message.  Each yields ``(label, updated_objects, emitted)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .kernel import INF, Msg, Oid, TimeValue, monus

AMERICAN = "american"
EUROPEAN = "european"

RED = ("red",)
GREEN = ("green",)
YELLOW = ("yellow",)
RED_YELLOW = ("red", "yellow")
BLINKING_YELLOW = ("blinkingYellow",)
BLINKING_RED = ("blinkingRed",)

NORMAL_STATES = frozenset({"red", "toRedYellow", "toGreen", "green", "yellow"})


@dataclass(frozen=True)
class Params:
    regime: str = AMERICAN
    delta: int = 1
    safety_margin: int = 1
    yellow_time: int = 1
    walk_time: int = 2

    def __post_init__(self):
        if self.regime not in (AMERICAN, EUROPEAN):
            raise ValueError(f"unknown regime {self.regime!r}")
        for name in ("delta", "safety_margin", "yellow_time", "walk_time"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be nonzero")

    @property
    def min_green_time(self) -> int:
        return self.walk_time + 1

    @property
    def min_red_time(self) -> int:
        return self.safety_margin + self.min_green_time + self.yellow_time + self.safety_margin

    @property
    def american(self) -> bool:
        return self.regime == AMERICAN

    def red_wait(self, red_time: int) -> TimeValue:
        """Red time left after turning red, before checking for waiting traffic."""
        return monus(red_time, self.delta + self.yellow_time + self.safety_margin)

    def restart_red_wait(self, red_time: int) -> TimeValue:
        """Red timer of the yielding light when the other one restarts in green.

        Equals ``greenTime(other) monus Delta``, the offset of the initial state.
        """
        return monus(red_time, self.delta + self.yellow_time + 2 * self.safety_margin)


def _notify(oid: Oid, kind: str, failed: Oid) -> list[Msg]:
    if oid != failed:
        return []
    return [Msg(kind, sib, about=oid) for sib in oid.siblings()]


class CarLight(NamedTuple):
    oid: Oid
    lights: tuple
    timer: TimeValue
    state: str
    red_time: int
    green_time: int
    ped_waiting: bool = False
    default_starter: bool = False
    errors: int = 0  # n of error(n); only meaningful in state "error"

    def advance(self, d: int) -> CarLight:
        if self.timer == INF:
            return self
        return self._replace(timer=monus(self.timer, d))

    @property
    def round_time(self) -> int:
        return self.green_time + self.red_time

    def fire(self, c, p: Params):
        if self.timer != 0:
            return
        st = self.state
        if st == "red":
            cars = c.get(self.oid.approach()).cars_present
            if not cars and not self.ped_waiting:
                yield ("dontGoGreen",
                       (self._replace(timer=self.green_time + self.red_time + p.yellow_time),),
                       (Msg("continueGreen", self.oid.opposite()),))
            elif p.american:
                yield ("redToSafetyMargin",
                       (self._replace(state="toGreen",
                                      timer=p.delta + p.yellow_time + p.safety_margin),), ())
            else:
                yield ("redToSafetyMargin",
                       (self._replace(state="toRedYellow", timer=p.delta + p.yellow_time),), ())
        elif st == "toRedYellow":
            yield ("redYellowToGreen",
                   (self._replace(state="toGreen", lights=RED_YELLOW, timer=p.safety_margin),), ())
        elif st == "toGreen":
            yield ("redToGreen",
                   (self._replace(state="green", lights=GREEN, timer=self.green_time,
                                  ped_waiting=False),),
                   (Msg("pedGo", self.oid.pl(), self.green_time),) if self.ped_waiting else ())
        elif st == "green":
            yield ("greenToYellow",
                   (self._replace(state="yellow", lights=YELLOW, timer=p.yellow_time),), ())
        elif st == "yellow":
            yield ("goRed",
                   (self._replace(state="red", lights=RED, timer=p.red_wait(self.red_time)),), ())
        elif st == "emergency":
            if self.lights == YELLOW:
                yield ("emergencyYellowToRed", (self._replace(lights=RED, timer=INF),), ())
        elif st == "errorRecovery":
            yield ("recoveryDone", (self._restart(p, self.default_starter, clear_peds=True),), ())

    def _restart(self, p: Params, green: bool, clear_peds: bool) -> CarLight:
        if green:
            return self._replace(state="green", lights=GREEN, timer=self.green_time,
                                 ped_waiting=False, errors=0)
        return self._replace(state="red", lights=RED, timer=p.restart_red_wait(self.red_time),
                             ped_waiting=False if clear_peds else self.ped_waiting, errors=0)

    def _resume_ped(self) -> Msg:
        if self.ped_waiting:
            return Msg("resumeGreen", self.oid.pl(), self.green_time)
        return Msg("resumeRed", self.oid.pl())

    def receive(self, m: Msg, c, p: Params):
        kind = m.kind
        st = self.state
        normal = st in NORMAL_STATES
        failed = st == "error" or st == "errorRecovery"
        if kind == "error":
            if st != "error":
                lights = BLINKING_YELLOW if self.default_starter else BLINKING_RED
                yield ("somethingBroken1",
                       (self._replace(lights=lights, state="error", errors=1, timer=INF),),
                       _notify(self.oid, "error", m.about))
            else:
                yield ("somethingBrokenMore", (self._replace(errors=self.errors + 1),),
                       _notify(self.oid, "error", m.about))
        elif kind == "repaired":
            if st == "error" and self.errors >= 2:
                yield ("repairDecrement", (self._replace(errors=self.errors - 1),),
                       _notify(self.oid, "repaired", m.about))
            elif st == "error":
                lights = GREEN if self.default_starter else RED
                yield ("lastDeviceFixed",
                       (self._replace(state="errorRecovery", errors=0, timer=p.delta,
                                      lights=lights),),
                       _notify(self.oid, "repaired", m.about))
            else:
                yield ("ignoreRepaired", (), ())
        elif failed:
            yield (f"errorIgnore:{kind}", (), ())
        elif kind == "pedsWaiting":
            if st == "green" and self.timer >= p.walk_time:
                yield ("buttonPressedTurnOn", (), (Msg("pedGo", self.oid.pl(), self.timer),))
            else:
                yield ("rememberButtonPressed", (self._replace(ped_waiting=True),), ())
        elif kind == "continueGreen":
            if normal:
                t = self.timer + self.green_time + self.red_time + p.yellow_time
                yield ("continueGreen",
                       (self._replace(timer=t, ped_waiting=False),),
                       (Msg("pedGo", self.oid.pl(), t),) if self.ped_waiting else ())
            else:
                yield ("emergencyIgnore:continueGreen", (), ())
        elif kind == "emergencyDev":
            if normal:
                if st == "green":
                    timer, lights = p.yellow_time, YELLOW
                elif st == "yellow":
                    timer, lights = self.timer, YELLOW
                else:
                    timer, lights = INF, RED
                yield ("newEmergency",
                       (self._replace(state="emergency", timer=timer, lights=lights),),
                       (Msg("emergencyDev", self.oid.pl()),))
            else:
                yield ("redundantEmergency", (), ())
        elif kind == "emergencyOverDev":
            if st != "emergency":
                yield ("redundantEmergencyOver", (), ())
            elif not self.default_starter:
                yield ("emergencyOverOther", (), ())
            else:
                appr = c.get(self.oid.approach())
                if appr.cars_present or self.ped_waiting:
                    yield ("emergencyOverMainDirectionStart",
                           (self._restart(p, True, False),),
                           (Msg("reStartRed", self.oid.opposite()), self._resume_ped()))
                else:
                    yield ("emergencyOverMainDirectionYield",
                           (self._restart(p, False, False),),
                           (Msg("reStartGreen", self.oid.opposite()),
                            Msg("resumeRed", self.oid.pl())))
        elif kind == "reStartRed":
            if st == "emergency":
                yield ("reStartRed", (self._restart(p, False, False),),
                       (Msg("resumeRed", self.oid.pl()),))
            else:
                yield ("ignoreReStart", (), ())
        elif kind == "reStartGreen":
            if st == "emergency":
                yield ("reStartGreen", (self._restart(p, True, False),), (self._resume_ped(),))
            else:
                yield ("ignoreReStart", (), ())
        else:
            raise ValueError(f"car light cannot receive {m}")


class PedLight(NamedTuple):
    oid: Oid
    timer: TimeValue = INF
    color: str = "red"
    button_lit: bool = False
    mode: str = "normal"
    errors: int = 0  # n of error(n); only meaningful in mode "error"

    def advance(self, d: int) -> PedLight:
        if self.timer == INF:
            return self
        return self._replace(timer=monus(self.timer, d))

    def fire(self, c, p: Params):
        if self.timer != 0:
            return
        if self.mode == "errorRecovery":
            yield ("pedRecoveryDone",
                   (self._replace(mode="normal", color="red", timer=INF, button_lit=False),), ())
        elif self.color == "green":
            yield ("startBlinking", (self._replace(timer=p.walk_time, color="blinking"),), ())
        elif self.color == "blinking":
            yield ("stop", (self._replace(timer=INF, color="red"),), ())

    def receive(self, m: Msg, c, p: Params):
        kind = m.kind
        mode = self.mode
        if kind == "error":
            if mode != "error":
                yield ("pedBroken1",
                       (self._replace(mode="error", errors=1, color="off", timer=INF),),
                       _notify(self.oid, "error", m.about))
            else:
                yield ("pedBrokenMore", (self._replace(errors=self.errors + 1),),
                       _notify(self.oid, "error", m.about))
        elif kind == "repaired":
            if mode == "error" and self.errors >= 2:
                yield ("pedRepairDecrement", (self._replace(errors=self.errors - 1),),
                       _notify(self.oid, "repaired", m.about))
            elif mode == "error":
                yield ("pedLastFixed",
                       (self._replace(mode="errorRecovery", errors=0, timer=p.delta),),
                       _notify(self.oid, "repaired", m.about))
            else:
                yield ("ignoreRepaired", (), ())
        elif mode == "error" or mode == "errorRecovery":
            yield (f"errorIgnore:{kind}", (), ())
        elif kind == "newPed":
            if not self.button_lit and self.color != "green":
                yield ("newPedestrian1", (self._replace(button_lit=True),),
                       (Msg("pedsWaiting", self.oid.cl()),))
            else:
                yield ("newPedestrian2", (), ())
        elif kind == "pedGo":
            if mode == "normal":
                yield ("turnGreen",
                       (self._replace(timer=monus(m.dur, p.walk_time), color="green",
                                      button_lit=False),), ())
            else:
                yield ("emergencyIgnore:pedGo", (), ())
        elif kind == "emergencyDev":
            if mode == "normal":
                yield ("pedEmergency",
                       (self._replace(mode="emergency", color="red", timer=INF),), ())
            else:
                yield ("redundantEmergency", (), ())
        elif kind == "resumeRed":
            if mode == "emergency":
                yield ("pedResumeRed", (self._replace(mode="normal", color="red", timer=INF),), ())
            else:
                yield ("ignoreResume", (), ())
        elif kind == "resumeGreen":
            if mode == "emergency":
                yield ("pedResumeGreen",
                       (self._replace(mode="normal", color="green",
                                      timer=monus(m.dur, p.walk_time), button_lit=False),), ())
            else:
                yield ("ignoreResume", (), ())
        else:
            raise ValueError(f"pedestrian light cannot receive {m}")


class Approach(NamedTuple):
    oid: Oid
    cars_present: bool = False

    timer = INF

    def advance(self, d: int) -> Approach:
        return self

    def fire(self, c, p: Params):
        if self.cars_present:
            light = c.get(self.oid.cl())
            if light is not None and light.lights == GREEN:
                yield ("allCarsPass", (self._replace(cars_present=False),), ())

    def receive(self, m: Msg, c, p: Params):
        if m.kind != "newCars":
            raise ValueError(f"approach sensor cannot receive {m}")
        yield ("newCars", (self._replace(cars_present=True),), ())
