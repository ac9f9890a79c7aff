"""Nondeterministic generators for traffic, emergencies and device failures."""

from __future__ import annotations

from itertools import combinations
from typing import NamedTuple

from .kernel import Msg, Oid, TimeValue, monus, xing_oid


class PeriodicEnv(NamedTuple):
    """Emits an arbitrary subset of ``possible_events`` every ``frequency`` units."""

    oid: Oid
    frequency: int
    time_to_next_events: TimeValue
    possible_events: tuple

    @property
    def timer(self) -> TimeValue:
        return self.time_to_next_events

    def advance(self, d: int) -> PeriodicEnv:
        return self._replace(time_to_next_events=monus(self.time_to_next_events, d))

    def fire(self, c, p):
        if self.time_to_next_events != 0:
            return
        reset = self._replace(time_to_next_events=self.frequency)
        events = self.possible_events
        seen = set()
        for k in range(len(events) + 1):
            for subset in combinations(events, k):
                if subset in seen:
                    continue
                seen.add(subset)
                yield ("generateSubsetAndReset", (reset,), subset)

    def receive(self, m, c, p):
        raise ValueError(f"environment cannot receive {m}")


class EmergencyEnv(NamedTuple):
    """Alternately signals the start and the end of an emergency."""

    oid: Oid
    frequency: int
    time_to_next_events: TimeValue = 0
    emergency_on: bool = False

    @property
    def timer(self) -> TimeValue:
        return self.time_to_next_events

    def advance(self, d: int) -> EmergencyEnv:
        return self._replace(time_to_next_events=monus(self.time_to_next_events, d))

    def fire(self, c, p):
        if self.time_to_next_events != 0:
            return
        reset = self._replace(time_to_next_events=self.frequency)
        yield ("skipEmergencyDecision", (reset,), ())
        kind = "emergencyOverXing" if self.emergency_on else "emergencyXing"
        yield (kind, (reset._replace(emergency_on=not self.emergency_on),),
               (Msg(kind, xing_oid(self.oid.xing)),))

    def receive(self, m, c, p):
        raise ValueError(f"environment cannot receive {m}")


class FailureEnv(NamedTuple):
    """Fails and repairs one device.

    In phase ``up`` a failure may be injected every ``frequency`` units; in
    phase ``down`` a repair may happen every ``frequency`` units.  After a
    repair the next decision point is ``min_separation`` units away.
    """

    oid: Oid
    frequency: int
    min_separation: int
    phase: str = "up"
    timer: TimeValue = 0

    @property
    def device(self) -> Oid:
        return self.oid.guarded()

    def advance(self, d: int) -> FailureEnv:
        return self._replace(timer=monus(self.timer, d))

    def fire(self, c, p):
        if self.timer != 0:
            return
        dev = self.device
        if self.phase == "up":
            yield ("skipFailure", (self._replace(timer=self.frequency),), ())
            yield ("injectFailure", (self._replace(phase="down", timer=self.frequency),),
                   (Msg("error", dev, about=dev),))
        else:
            yield ("skipRepair", (self._replace(timer=self.frequency),), ())
            yield ("repairDevice", (self._replace(phase="up", timer=self.min_separation),),
                   (Msg("repaired", dev, about=dev),))

    def receive(self, m, c, p):
        raise ValueError(f"environment cannot receive {m}")


def failure_env_oid(device: Oid) -> Oid:
    return Oid("envFailure", device.xing, device.dir, device.kind)

