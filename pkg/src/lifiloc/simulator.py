"""Deterministic walk simulation producing RSSI snapshots and lamp triggers.

The agent walks the waypoint polyline at constant speed. Every
``sample_period`` seconds it records one RSSI snapshot over all access points,
and it emits a Li-Fi trigger on the tick it enters a lamp's coverage disc.

Noise for access point ``ap`` at tick ``k`` comes from its own PCG64 stream
seeded with ``(rng_seed, crc32(ap.id), k)``. Adding or removing an AP therefore
leaves every other AP's noise unchanged.
"""

from __future__ import annotations

import json
import math
import os
import zlib
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Any, Iterable, Mapping, Union

import jsonschema
import numpy as np

from lifiloc.calibration import LiFiTrigger
from lifiloc.exceptions import FloorPlanError, ScenarioError
from lifiloc.model import (
    RECT_SCHEMA,
    FloorPlan,
    LiFiLamp,
    Point2D,
    Rect,
    RssiSample,
    RssiSnapshot,
    floorplan_from_dict,
    load_floorplan,
)
from lifiloc.propagation import EnvironmentField, sample_environment

SEED_ENV_VAR = "LIFI_CALIB_SEED"

Event = Union[RssiSnapshot, LiFiTrigger]


@dataclass(frozen=True)
class Scenario:
    plan: FloorPlan
    field: EnvironmentField
    waypoints: tuple[Point2D, ...]
    speed: float
    sample_period: float
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if not self.waypoints:
            raise ScenarioError("scenario needs at least one waypoint")
        if not self.speed > 0:
            raise ScenarioError(f"speed must be > 0, got {self.speed}")
        if not self.sample_period > 0:
            raise ScenarioError(f"sample_period must be > 0, got {self.sample_period}")
        for wp in self.waypoints:
            if not self.plan.bounds.contains(wp):
                raise ScenarioError(f"waypoint ({wp.x}, {wp.y}) outside floor-plan bounds")

    @property
    def path_length(self) -> float:
        return sum(a.distance_to(b) for a, b in zip(self.waypoints, self.waypoints[1:]))

    @property
    def duration(self) -> float:
        return self.path_length / self.speed


@dataclass(frozen=True)
class Trace:
    events: tuple[Event, ...]
    ground_truth: tuple[tuple[float, Point2D], ...] = ()

    @property
    def snapshots(self) -> list[RssiSnapshot]:
        return [e for e in self.events if isinstance(e, RssiSnapshot)]

    @property
    def triggers(self) -> list[LiFiTrigger]:
        return [e for e in self.events if isinstance(e, LiFiTrigger)]

    def truth_at(self, t: float) -> Point2D | None:
        for ts, p in self.ground_truth:
            if ts == t:
                return p
        return None


def detect_lamp(position: Point2D, lamps: Iterable[LiFiLamp]) -> str | None:
    """Id of the covering lamp whose center is nearest ``position``.

    Ties go to the lexicographically smallest id. ``None`` if no disc covers it.
    """
    best = None
    for lamp in lamps:
        d = lamp.position.distance_to(position)
        if d <= lamp.coverage_radius:
            key = (d, lamp.id)
            if best is None or key < best:
                best = key
    return None if best is None else best[1]


class _Polyline:
    def __init__(self, waypoints: tuple[Point2D, ...]):
        self.points = waypoints
        self.cum = [0.0]
        for a, b in zip(waypoints, waypoints[1:]):
            self.cum.append(self.cum[-1] + a.distance_to(b))

    def at(self, s: float) -> Point2D:
        pts, cum = self.points, self.cum
        if s <= 0 or len(pts) == 1:
            return pts[0]
        if s >= cum[-1]:
            return pts[-1]
        for i in range(1, len(cum)):
            if s <= cum[i]:
                seg = cum[i] - cum[i - 1]
                if seg == 0:
                    return pts[i]
                frac = (s - cum[i - 1]) / seg
                a, b = pts[i - 1], pts[i]
                return Point2D(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y))
        return pts[-1]


def noise_stream(seed: int, ap_id: str, tick: int) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(ap_id.encode("utf-8")), int(tick)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def tick_count(duration: float, sample_period: float) -> int:
    # the epsilon keeps an exact multiple from spilling into an extra tick
    return max(math.ceil(duration / sample_period - 1e-9), 0) + 1


def run(scenario: Scenario) -> Trace:
    """Simulate the walk; deterministic in ``scenario.rng_seed``."""
    plan, fld = scenario.plan, scenario.field
    path = _Polyline(scenario.waypoints)
    events: list[Event] = []
    truth: list[tuple[float, Point2D]] = []
    inside_prev: set[str] = set()
    for k in range(tick_count(scenario.duration, scenario.sample_period)):
        t = k * scenario.sample_period
        pos = path.at(t * scenario.speed)
        inside_now = {lamp.id for lamp in plan.lamps if lamp.covers(pos)}
        if inside_now - inside_prev:
            events.append(LiFiTrigger(timestamp=t, lamp_id=detect_lamp(pos, plan.lamps)))
        inside_prev = inside_now
        samples = [
            sample_environment(
                fld, ap, pos, noise_stream(scenario.rng_seed, ap.id, k) if fld.noise_sigma > 0 else None
            )
            for ap in plan.access_points
        ]
        events.append(RssiSnapshot(timestamp=t, samples=tuple(samples)))
        truth.append((t, pos))
    return Trace(events=tuple(events), ground_truth=tuple(truth))


# --- scenario documents -------------------------------------------------------

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "floorplan": {"type": ["object", "string"]},
        "field": {
            "type": "object",
            "properties": {
                "regions": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"rect": RECT_SCHEMA, "n": {"type": "number"}},
                        "required": ["rect", "n"],
                        "additionalProperties": False,
                    },
                },
                "default_n": {"type": "number"},
                "noise_sigma": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "waypoints": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    {
                        "type": "object",
                        "properties": {"x": {"type": "number"}, "y": {"type": "number"}},
                        "required": ["x", "y"],
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "speed": {"type": "number"},
        "sample_period": {"type": "number"},
        "rng_seed": {"type": "integer"},
    },
    "required": ["floorplan", "field", "waypoints", "speed", "sample_period", "rng_seed"],
    "additionalProperties": False,
}


def scenario_from_dict(doc: Mapping[str, Any], base_dir: str | PathLike | None = None) -> Scenario:
    """Build a :class:`Scenario`; a string ``floorplan`` is a path relative to ``base_dir``."""
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"scenario schema violation at {path}: {exc.message}") from None
    fp = doc["floorplan"]
    if isinstance(fp, str):
        fp_path = Path(fp)
        if base_dir is not None and not fp_path.is_absolute():
            fp_path = Path(base_dir) / fp_path
        plan = load_floorplan(fp_path)
    else:
        plan = floorplan_from_dict(fp)
    f = doc["field"]
    try:
        fld = EnvironmentField(
            regions=tuple((Rect(**r["rect"]), r["n"]) for r in f.get("regions", [])),
            default_n=f.get("default_n", EnvironmentField.default_n),
            noise_sigma=f.get("noise_sigma", 0.0),
        )
        waypoints = tuple(
            Point2D(*w) if isinstance(w, list) else Point2D(w["x"], w["y"]) for w in doc["waypoints"]
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return Scenario(
        plan=plan,
        field=fld,
        waypoints=waypoints,
        speed=float(doc["speed"]),
        sample_period=float(doc["sample_period"]),
        rng_seed=int(doc["rng_seed"]),
    )


def load_scenario(path: str | PathLike, seed_override: int | None = None) -> Scenario:
    """Read a scenario JSON file.

    ``seed_override`` replaces ``rng_seed``; when it is None the
    ``LIFI_CALIB_SEED`` environment variable is consulted instead.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON in {path}: {exc}") from None
    try:
        scenario = scenario_from_dict(doc, base_dir=path.parent)
    except FloorPlanError as exc:
        raise ScenarioError(f"floor plan: {exc}") from None
    if seed_override is None and os.environ.get(SEED_ENV_VAR):
        try:
            seed_override = int(os.environ[SEED_ENV_VAR])
        except ValueError:
            raise ScenarioError(f"{SEED_ENV_VAR} must be an integer") from None
    if seed_override is not None:
        scenario = Scenario(
            plan=scenario.plan,
            field=scenario.field,
            waypoints=scenario.waypoints,
            speed=scenario.speed,
            sample_period=scenario.sample_period,
            rng_seed=seed_override,
        )
    return scenario


# --- trace files (JSON Lines) -------------------------------------------------


def trace_lines(trace: Trace) -> list[str]:
    """Serialize a trace; at each timestamp the order is trigger, snapshot, truth."""
    truth = dict(trace.ground_truth)
    out = []
    emitted_truth = set()
    for ev in trace.events:
        if isinstance(ev, LiFiTrigger):
            rec = {"t": ev.timestamp, "type": "trigger", "lamp": ev.lamp_id}
            out.append(json.dumps(rec))
            continue
        rec = {
            "t": ev.timestamp,
            "type": "snapshot",
            "samples": [{"ap": s.ap_id, "rssi": s.rssi} for s in ev.samples],
        }
        out.append(json.dumps(rec))
        if ev.timestamp in truth and ev.timestamp not in emitted_truth:
            p = truth[ev.timestamp]
            out.append(json.dumps({"t": ev.timestamp, "type": "truth", "x": p.x, "y": p.y}))
            emitted_truth.add(ev.timestamp)
    for t, p in trace.ground_truth:
        if t not in emitted_truth:
            out.append(json.dumps({"t": t, "type": "truth", "x": p.x, "y": p.y}))
    return out


def write_trace(trace: Trace, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in trace_lines(trace):
            fh.write(line + "\n")


def parse_trace(lines: Iterable[str]) -> Trace:
    events: list[Event] = []
    truth: list[tuple[float, Point2D]] = []
    last_t = -math.inf
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            t = float(rec["t"])
            kind = rec["type"]
            if kind == "snapshot":
                samples = tuple(RssiSample(ap_id=s["ap"], rssi=float(s["rssi"])) for s in rec["samples"])
                events.append(RssiSnapshot(timestamp=t, samples=samples))
            elif kind == "trigger":
                events.append(LiFiTrigger(timestamp=t, lamp_id=rec["lamp"]))
            elif kind == "truth":
                truth.append((t, Point2D(float(rec["x"]), float(rec["y"]))))
            else:
                raise ScenarioError(f"unknown event type {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise ScenarioError(f"trace line {lineno}: {exc}") from None
            raise ScenarioError(f"trace line {lineno}: malformed record ({exc})") from None
        if kind != "truth":
            if t < last_t:
                raise ScenarioError(f"trace line {lineno}: timestamps go backwards")
            last_t = t
    return Trace(events=tuple(events), ground_truth=tuple(truth))


def read_trace(path: str | PathLike) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh)
