"""Configuration algebra and executable semantics of the intersection model.

A configuration is a multiset of objects (device controllers, environment
generators) and in-flight messages.  Objects are immutable ``NamedTuple``
values that know their own rules:

* ``obj.fire(c, params)`` yields ``(label, updated_objects, emitted)`` for
  timer-driven and spontaneous rules,
* ``obj.receive(msg, c, params)`` yields the same for the rule consuming
  ``msg``,
* ``obj.timer`` is the object's next deadline and ``obj.advance(d)`` lets
  ``d`` time units pass.

Time is discrete: a time value is a non-negative ``int`` or :data:`INF`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

INF = math.inf
TimeValue = Union[int, float]

NS = "NS"
EW = "EW"
DIRECTIONS = (NS, EW)


def monus(x: TimeValue, y: TimeValue) -> TimeValue:
    """Truncated subtraction ``max(x - y, 0)``; ``INF monus y`` stays ``INF``."""
    if y == INF:
        raise ValueError("monus needs a finite subtrahend")
    if x == INF:
        return INF
    return x - y if x > y else 0


def opposite_dir(d: str) -> str:
    return EW if d == NS else NS


class Oid(NamedTuple):
    """Object identifier.

    ``device`` is only used by failure generators, where ``(device, xing, dir)``
    names the guarded device.
    """

    kind: str
    xing: str
    dir: str = ""
    device: str = ""

    def opposite(self) -> Oid:
        return self._replace(dir=opposite_dir(self.dir))

    def pl(self) -> Oid:
        return Oid("pedLight", self.xing, self.dir)

    def cl(self) -> Oid:
        return Oid("carLight", self.xing, self.dir)

    def approach(self) -> Oid:
        return Oid("approach", self.xing, self.dir)

    def guarded(self) -> Oid:
        """The device a failure generator acts on."""
        return Oid(self.device, self.xing, self.dir)

    def siblings(self) -> tuple[Oid, Oid, Oid]:
        """The three other light controllers of the same intersection."""
        other = self.pl() if self.kind == "carLight" else self.cl()
        return (self.opposite(), other, other.opposite())

    def __str__(self) -> str:
        if self.kind == "envFailure":
            return f"errors({self.guarded()})"
        if self.dir:
            return f'{self.kind}("{self.xing}",{self.dir})'
        return f'{self.kind}("{self.xing}")'


def car_light(xing: str, d: str) -> Oid:
    return Oid("carLight", xing, d)


def ped_light(xing: str, d: str) -> Oid:
    return Oid("pedLight", xing, d)


def approach(xing: str, d: str) -> Oid:
    return Oid("approach", xing, d)


def ped_stop(xing: str, d: str) -> Oid:
    return Oid("pedStop", xing, d)


def xing_oid(xing: str) -> Oid:
    return Oid("xing", xing)


NO_OID = Oid("", "")


class Msg(NamedTuple):
    kind: str
    to: Oid
    dur: TimeValue = 0
    about: Oid = NO_OID

    def receiver(self) -> Oid:
        if self.to.kind == "pedStop":
            return self.to.pl()
        return self.to

    def __str__(self) -> str:
        args = [str(self.to)]
        if self.kind in ("pedGo", "resumeGreen"):
            args.append(str(self.dur))
        if self.about != NO_OID:
            args.append(str(self.about))
        return f"{self.kind}({', '.join(args)})"


MESSAGE_KINDS = (
    "continueGreen", "pedGo", "pedsWaiting", "newPed", "newCars",
    "emergencyXing", "emergencyOverXing", "emergencyDev", "emergencyOverDev",
    "resumeRed", "resumeGreen", "reStartRed", "reStartGreen", "error", "repaired",
)  # fmt: skip

_DISTRIBUTED = {"emergencyXing": "emergencyDev", "emergencyOverXing": "emergencyOverDev"}


def _normalize_msgs(msgs: Iterable[Msg]) -> list[Msg]:
    out = []
    for m in msgs:
        kind = _DISTRIBUTED.get(m.kind)
        if kind is None:
            out.append(m)
        else:
            xing = m.to.xing
            out.append(Msg(kind, car_light(xing, EW)))
            out.append(Msg(kind, car_light(xing, NS)))
    return out


@dataclass(frozen=True)
class Config:
    """Immutable multiset of objects and messages.

    ``objects`` is kept sorted by oid and ``messages`` sorted, so structural
    equality is multiset equality.  ``layout`` maps oids to positions; it is
    shared by every configuration derived from the same initial one.
    """

    objects: tuple
    messages: tuple = ()
    layout: dict = field(default=None, compare=False, repr=False)

    @classmethod
    def of(cls, objects: Iterable, messages: Iterable[Msg] = ()) -> Config:
        objs = sorted(objects, key=lambda o: o.oid)
        layout = {o.oid: i for i, o in enumerate(objs)}
        if len(layout) != len(objs):
            raise ValueError("duplicate object identifiers")
        return cls(tuple(objs), tuple(sorted(_normalize_msgs(messages))), layout)

    def get(self, oid: Oid):
        i = self.layout.get(oid)
        return None if i is None else self.objects[i]

    def __contains__(self, oid: Oid) -> bool:
        return oid in self.layout

    def has_message(self, m: Msg) -> bool:
        return m in self.messages

    def rewrite(self, updates: Iterable = (), consumed: int | None = None,
                emitted: Iterable[Msg] = ()) -> Config:
        """Replace updated objects, drop message ``consumed`` (an index), add ``emitted``."""
        objs = list(self.objects)
        layout = self.layout
        for o in updates:
            objs[layout[o.oid]] = o
        msgs = list(self.messages)
        if consumed is not None:
            del msgs[consumed]
        if emitted:
            msgs.extend(_normalize_msgs(emitted))
            msgs.sort()
        return Config(tuple(objs), tuple(msgs), layout)

    def replace_objects(self, *objs) -> Config:
        return self.rewrite(objs)

    def xings(self) -> list[str]:
        return sorted({o.oid.xing for o in self.objects})


def normalize(c: Config) -> Config:
    """Distribute intersection-level emergency messages to both car lights."""
    if not any(m.kind in _DISTRIBUTED for m in c.messages):
        return c
    return Config(c.objects, tuple(sorted(_normalize_msgs(c.messages))), c.layout)


def instantaneous_successors(c: Config, params) -> list[tuple[str, Config]]:
    """All ``(rule_label, successor)`` pairs of one zero-time rule application."""
    out: list[tuple[str, Config]] = []
    seen = set()
    for obj in c.objects:
        for label, updates, emitted in obj.fire(c, params):
            nxt = c.rewrite(updates, None, emitted)
            if (label, nxt) not in seen:
                seen.add((label, nxt))
                out.append((label, nxt))
    prev = None
    for i, m in enumerate(c.messages):
        if m == prev:
            continue
        prev = m
        recv = c.get(m.receiver())
        if recv is None:
            raise KeyError(f"no receiver for {m}")
        for label, updates, emitted in recv.receive(m, c, params):
            nxt = c.rewrite(updates, i, emitted)
            if (label, nxt) not in seen:
                seen.add((label, nxt))
                out.append((label, nxt))
    return out


def max_time_elapse(c: Config) -> TimeValue:
    if c.messages:
        return 0
    best = INF
    for obj in c.objects:
        t = obj.timer
        if t < best:
            if t == 0:
                return 0
            best = t
    return best


def tick(c: Config, d: int) -> Config:
    """Let ``d`` time units elapse; ``d`` may not skip a deadline."""
    if d < 1 or d == INF:
        raise ValueError(f"tick duration must be finite and positive, got {d}")
    limit = max_time_elapse(c)
    if d > limit:
        raise ValueError(f"tick by {d} exceeds maximal time elapse {limit}")
    return Config(tuple(o.advance(d) for o in c.objects), c.messages, c.layout)


def tick_label(d: TimeValue) -> str:
    return f"tick({d})"


def successors(c: Config, params) -> list[tuple[str, Config]]:
    """Instantaneous successors plus the maximal tick, when time can advance."""
    out = instantaneous_successors(c, params)
    d = max_time_elapse(c)
    if 0 < d < INF:
        out.append((tick_label(d), tick(c, d)))
    return out


def canonical_key(c: Config) -> bytes:
    """Deterministic, injective byte encoding of a configuration."""
    return repr((c.objects, c.messages)).encode()
