"""Deliberately broken car-light controllers for mutation tests."""

from __future__ import annotations

from contextlib import contextmanager

from crosslight.devices import GREEN, CarLight
from crosslight.kernel import Msg, monus

_original_fire = CarLight.fire


def retimed(extra_green: int, margin_in_go_red: bool = True,
            margin_before_green: bool = True):
    """Car lights with a longer green phase and optionally without safety margin.

    ``margin_in_go_red=False`` makes goRed wait ``redTime monus (Delta + yellow)``;
    ``margin_before_green=False`` drops the margin from redToSafetyMargin.
    """

    def fire(self, c, p):
        for label, updates, emitted in _original_fire(self, c, p):
            light = updates[0] if updates else None
            if label == "goRed" and not margin_in_go_red:
                light = light._replace(timer=monus(self.red_time, p.delta + p.yellow_time))
            elif label == "redToSafetyMargin" and not margin_before_green:
                drop = p.safety_margin if light.state == "toGreen" else 0
                light = light._replace(timer=light.timer - drop)
            elif label == "redYellowToGreen" and not margin_before_green:
                light = light._replace(timer=0)
            elif label == "redToGreen":
                light = light._replace(timer=self.green_time + extra_green)
                emitted = tuple(m._replace(dur=light.timer) for m in emitted)
            yield label, (light,) + tuple(updates[1:]), emitted

    return fire


def no_safety_margin(extra_green: int):
    """goRed and redToSafetyMargin both ignore the safety margin."""
    return retimed(extra_green, margin_in_go_red=False, margin_before_green=False)


def green_straight_from_red(self, c, p):
    """redToGreen fires from state red, skipping the safety phase."""
    for label, updates, emitted in _original_fire(self, c, p):
        if label == "redToSafetyMargin":
            label = "redToGreen"
            updates = (self._replace(state="green", lights=GREEN, timer=self.green_time,
                                     ped_waiting=False),)
            emitted = (Msg("pedGo", self.oid.pl(), self.green_time),) if self.ped_waiting else ()
        yield label, updates, emitted


@contextmanager
def patched_fire(fire):
    CarLight.fire = fire
    try:
        yield
    finally:
        CarLight.fire = _original_fire
