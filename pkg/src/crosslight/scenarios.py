"""Initial states: light objects, environments, and the scenario file reader."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .devices import AMERICAN, GREEN, RED, Approach, CarLight, Params, PedLight
from .environments import EmergencyEnv, FailureEnv, PeriodicEnv, failure_env_oid
from .kernel import (EW, INF, NS, Config, Msg, Oid, approach, car_light, monus,
                     opposite_dir, ped_light, ped_stop)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    xing: str = "Spitsbergen"
    green_time: int = 5
    red_time: int = 6
    emergency_period: int = 0
    car_faults: int = 0
    ped_faults: int = 0
    fail_frequency: int = 1
    fail_separation: int = 1
    params: Params = field(default_factory=Params)
    extra_intersections: tuple = ()

    @property
    def regime(self) -> str:
        return self.params.regime

    def validate(self) -> None:
        for name, green, red in self.intersections():
            check_light_times(green, red, self.params, name)
        if not 0 <= self.car_faults <= 2 or not 0 <= self.ped_faults <= 2:
            raise ScenarioError("car_faults and ped_faults must be in 0..2")
        if self.emergency_period < 0:
            raise ScenarioError("emergency_period must be >= 0")
        if self.fail_frequency < 1 or self.fail_separation < 1:
            raise ScenarioError("fail_frequency and fail_separation must be nonzero")
        names = [n for n, _, _ in self.intersections()]
        if len(set(names)) != len(names):
            raise ScenarioError("intersection names must be distinct")

    def intersections(self) -> list[tuple[str, int, int]]:
        return [(self.xing, self.green_time, self.red_time), *self.extra_intersections]


def init_spec(xing: str, green_time: int, red_time: int, period: int, car_faults: int,
              ped_faults: int, n1: int, n2: int, params: Params | None = None) -> ScenarioSpec:
    """The eight-argument ``init(XING, GREENTIME, REDTIME, T, CARF, PEDF, N1, N2)``."""
    return ScenarioSpec(xing, green_time, red_time, period, car_faults, ped_faults, n1, n2,
                        params or Params())


def check_light_times(green_time: int, red_time: int, p: Params, xing: str = "") -> None:
    where = f" for {xing}" if xing else ""
    if green_time < p.min_green_time:
        raise ScenarioError(f"green time {green_time}{where} below minimum {p.min_green_time}")
    if red_time < p.min_red_time:
        raise ScenarioError(f"red time {red_time}{where} below minimum {p.min_red_time}")


def build_lights(xing: str, prioritized: str, green_time: int, red_time: int,
                 p: Params) -> list:
    check_light_times(green_time, red_time, p, xing)
    other = opposite_dir(prioritized)
    return [
        CarLight(car_light(xing, prioritized), GREEN, green_time, "green", red_time,
                 green_time, ped_waiting=False, default_starter=True),
        CarLight(car_light(xing, other), RED, monus(green_time, p.delta), "red",
                 green_time + p.yellow_time + 2 * p.safety_margin,
                 monus(red_time, p.yellow_time + 2 * p.safety_margin),
                 ped_waiting=False, default_starter=False),
        PedLight(ped_light(xing, prioritized), INF, "red", False, "normal"),
        PedLight(ped_light(xing, other), INF, "red", False, "normal"),
        Approach(approach(xing, NS), False),
        Approach(approach(xing, EW), False),
    ]


def cars_and_peds(xing: str, frequency: int = 1) -> PeriodicEnv:
    events = (Msg("newCars", approach(xing, NS)), Msg("newCars", approach(xing, EW)),
              Msg("newPed", ped_stop(xing, NS)), Msg("newPed", ped_stop(xing, EW)))
    return PeriodicEnv(Oid("envCarsPeds", xing), frequency, 0, tuple(sorted(events)))


def failure_env(device: Oid, n1: int, n2: int) -> FailureEnv:
    return FailureEnv(failure_env_oid(device), n1, n2, "up", 0)


def build_env(spec: ScenarioSpec) -> list:
    x = spec.xing
    objs: list = [cars_and_peds(x, 1)]
    for name, _, _ in spec.extra_intersections:
        objs.append(cars_and_peds(name, 1))
    if spec.emergency_period != 0:
        objs.append(EmergencyEnv(Oid("envEmergency", x), spec.emergency_period, 0, False))
    n1, n2 = spec.fail_frequency, spec.fail_separation
    if spec.car_faults >= 1:
        objs.append(failure_env(car_light(x, NS), n1, n2))
    if spec.car_faults == 2:
        objs.append(failure_env(car_light(x, EW), n1, n2))
    if spec.ped_faults >= 1:
        objs.append(failure_env(ped_light(x, EW), n1, n2))
    if spec.ped_faults == 2:
        objs.append(failure_env(ped_light(x, NS), n1, n2))
    return objs


def build_init(spec: ScenarioSpec) -> Config:
    spec.validate()
    objs = []
    for name, green, red in spec.intersections():
        objs.extend(build_lights(name, NS, green, red, spec.params))
    objs.extend(build_env(spec))
    return Config.of(objs)


def init(xing: str, green_time: int, red_time: int, period: int, car_faults: int,
         ped_faults: int, n1: int, n2: int, params: Params | None = None) -> Config:
    return build_init(init_spec(xing, green_time, red_time, period, car_faults, ped_faults,
                                n1, n2, params))


_INT_KEYS = {
    "green_time": "green_time",
    "red_time": "red_time",
    "emergency_period": "emergency_period",
    "car_faults": "car_faults",
    "ped_faults": "ped_faults",
    "fail_frequency": "fail_frequency",
    "fail_separation": "fail_separation",
}


def parse_scenario(text: str, source: str = "<scenario>") -> ScenarioSpec:
    """Parse ``key = value`` scenario text; ``#`` starts a comment."""
    values: dict = {}
    extras = []
    regime = AMERICAN
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        where = f"{source}:{lineno}"
        if not sep or not key or not value:
            raise ScenarioError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        try:
            if key == "xing":
                values["xing"] = value.strip('"')
            elif key == "regime":
                if value not in ("american", "european"):
                    raise ScenarioError(f"{where}: unknown regime {value!r}")
                regime = value
            elif key == "intersection":
                name, green, red = (v.strip() for v in value.split(","))
                extras.append((name.strip('"'), int(green), int(red)))
            elif key in _INT_KEYS:
                values[_INT_KEYS[key]] = int(value)
            else:
                raise ScenarioError(f"{where}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"{where}: bad value {value!r} for {key}") from exc
    spec = ScenarioSpec(**values, params=Params(regime=regime), extra_intersections=tuple(extras))
    spec.validate()
    return spec


def read_scenario(path: str | Path) -> ScenarioSpec:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))


def format_scenario(spec: ScenarioSpec) -> str:
    lines = [
        f"xing = {spec.xing}",
        f"green_time = {spec.green_time}",
        f"red_time = {spec.red_time}",
        f"emergency_period = {spec.emergency_period}",
        f"car_faults = {spec.car_faults}",
        f"ped_faults = {spec.ped_faults}",
        f"fail_frequency = {spec.fail_frequency}",
        f"fail_separation = {spec.fail_separation}",
        f"regime = {spec.regime}",
    ]
    lines += [f"intersection = {n},{g},{r}" for n, g, r in spec.extra_intersections]
    return "\n".join(lines) + "\n"
