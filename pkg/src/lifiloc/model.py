"""Domain types shared across the package and the floor-plan document loader.

All types are frozen dataclasses. Coordinates are meters; RSSI values are
opaque "rssi-units" (the only requirement is that an AP's ``p0`` and the
readings taken from it share units).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Any, Iterable, Mapping

import jsonschema

from lifiloc.exceptions import FloorPlanError

DEFAULT_D0 = 1.0
DEFAULT_COVERAGE_RADIUS = 1.5
COLLINEAR_AREA_TOL = 1e-9

N_MIN = 0.05
N_MAX = 2.0


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def distance_to(self, other: Point2D) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        vals = (self.min_x, self.min_y, self.max_x, self.max_y)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rectangle bounds must be finite")
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise ValueError(f"inverted rectangle {vals}")

    def contains(self, p: Point2D) -> bool:
        return self.min_x <= p.x <= self.max_x and self.min_y <= p.y <= self.max_y

    def to_dict(self) -> dict[str, float]:
        return {"min_x": self.min_x, "min_y": self.min_y, "max_x": self.max_x, "max_y": self.max_y}


@dataclass(frozen=True)
class AccessPoint:
    id: str
    position: Point2D
    p0: float
    d0: float = DEFAULT_D0

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError(f"access point {self.id!r}: d0 must be > 0, got {self.d0}")
        if not math.isfinite(self.p0):
            raise ValueError(f"access point {self.id!r}: p0 must be finite")


@dataclass(frozen=True)
class LiFiLamp:
    id: str
    position: Point2D
    coverage_radius: float = DEFAULT_COVERAGE_RADIUS

    def __post_init__(self):
        if not self.coverage_radius > 0:
            raise ValueError(f"lamp {self.id!r}: coverage_radius must be > 0")

    def covers(self, p: Point2D) -> bool:
        return self.position.distance_to(p) <= self.coverage_radius


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance model parameters for one access point.

    ``n`` is only required to be finite here; positivity is checked where the
    model is inverted, and the clamp range is applied when exponents are derived.
    """

    p0: float
    d0: float
    n: float

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError(f"d0 must be > 0, got {self.d0}")
        if not (math.isfinite(self.p0) and math.isfinite(self.n)):
            raise ValueError("p0 and n must be finite")


@dataclass(frozen=True)
class RssiSample:
    ap_id: str
    rssi: float
    true_distance: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.rssi):
            raise ValueError(f"non-finite rssi for {self.ap_id!r}")
        if self.true_distance is not None and not self.true_distance > 0:
            raise ValueError("true_distance must be > 0 when present")


@dataclass(frozen=True)
class RssiSnapshot:
    timestamp: float
    samples: tuple[RssiSample, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        ids = [s.ap_id for s in self.samples]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate ap_id in snapshot at t={self.timestamp}")

    def get(self, ap_id: str) -> RssiSample | None:
        for s in self.samples:
            if s.ap_id == ap_id:
                return s
        return None

    @property
    def ap_ids(self) -> tuple[str, ...]:
        return tuple(s.ap_id for s in self.samples)


def max_triangle_area(points: Iterable[Point2D]) -> float:
    """Largest triangle area over all triples of ``points`` (0 for < 3 points)."""
    pts = list(points)
    best = 0.0
    for a, b, c in itertools.combinations(pts, 3):
        area = 0.5 * abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
        best = max(best, area)
    return best


@dataclass(frozen=True)
class FloorPlan:
    access_points: tuple[AccessPoint, ...]
    lamps: tuple[LiFiLamp, ...]
    bounds: Rect
    _ap_index: dict = field(init=False, repr=False, compare=False)
    _lamp_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "access_points", tuple(self.access_points))
        object.__setattr__(self, "lamps", tuple(self.lamps))
        _check_unique([ap.id for ap in self.access_points], "access point")
        _check_unique([lamp.id for lamp in self.lamps], "lamp")
        if len(self.access_points) < 3:
            raise FloorPlanError(
                f"at least 3 access points are required, got {len(self.access_points)}"
            )
        if max_triangle_area(ap.position for ap in self.access_points) < COLLINEAR_AREA_TOL:
            raise FloorPlanError("access points are collinear")
        for kind, items in (("access point", self.access_points), ("lamp", self.lamps)):
            for item in items:
                if not self.bounds.contains(item.position):
                    raise FloorPlanError(f"{kind} {item.id!r} lies outside bounds")
        object.__setattr__(self, "_ap_index", {ap.id: ap for ap in self.access_points})
        object.__setattr__(self, "_lamp_index", {lamp.id: lamp for lamp in self.lamps})

    def access_point(self, ap_id: str) -> AccessPoint:
        try:
            return self._ap_index[ap_id]
        except KeyError:
            raise FloorPlanError(f"unknown access point {ap_id!r}") from None

    def lamp(self, lamp_id: str) -> LiFiLamp:
        try:
            return self._lamp_index[lamp_id]
        except KeyError:
            raise FloorPlanError(f"unknown lamp {lamp_id!r}") from None

    def has_lamp(self, lamp_id: str) -> bool:
        return lamp_id in self._lamp_index

    def to_dict(self) -> dict[str, Any]:
        return {
            "access_points": [
                {"id": ap.id, "x": ap.position.x, "y": ap.position.y, "p0": ap.p0, "d0": ap.d0}
                for ap in self.access_points
            ],
            "lamps": [
                {
                    "id": lamp.id,
                    "x": lamp.position.x,
                    "y": lamp.position.y,
                    "coverage_radius": lamp.coverage_radius,
                }
                for lamp in self.lamps
            ],
            "bounds": self.bounds.to_dict(),
        }


def _check_unique(ids: list[str], kind: str) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise FloorPlanError(f"duplicate {kind} id {i!r}")
        seen.add(i)


_NUM = {"type": "number"}

RECT_SCHEMA = {
    "type": "object",
    "properties": {"min_x": _NUM, "min_y": _NUM, "max_x": _NUM, "max_y": _NUM},
    "required": ["min_x", "min_y", "max_x", "max_y"],
    "additionalProperties": False,
}

FLOORPLAN_SCHEMA = {
    "type": "object",
    "properties": {
        "access_points": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "x": _NUM,
                    "y": _NUM,
                    "p0": _NUM,
                    "d0": {"type": "number", "exclusiveMinimum": 0},
                },
                "required": ["id", "x", "y", "p0"],
                "additionalProperties": False,
            },
        },
        "lamps": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "x": _NUM,
                    "y": _NUM,
                    "coverage_radius": {"type": "number", "exclusiveMinimum": 0},
                },
                "required": ["id", "x", "y"],
                "additionalProperties": False,
            },
        },
        "bounds": RECT_SCHEMA,
    },
    "required": ["access_points", "lamps", "bounds"],
    "additionalProperties": False,
}


def floorplan_from_dict(doc: Mapping[str, Any]) -> FloorPlan:
    try:
        jsonschema.validate(doc, FLOORPLAN_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise FloorPlanError(f"floor plan schema violation at {path}: {exc.message}") from None
    try:
        aps = [
            AccessPoint(
                id=a["id"],
                position=Point2D(float(a["x"]), float(a["y"])),
                p0=float(a["p0"]),
                d0=float(a.get("d0", DEFAULT_D0)),
            )
            for a in doc["access_points"]
        ]
        lamps = [
            LiFiLamp(
                id=lp["id"],
                position=Point2D(float(lp["x"]), float(lp["y"])),
                coverage_radius=float(lp.get("coverage_radius", DEFAULT_COVERAGE_RADIUS)),
            )
            for lp in doc["lamps"]
        ]
        bounds = Rect(**{k: float(v) for k, v in doc["bounds"].items()})
    except ValueError as exc:
        if isinstance(exc, FloorPlanError):
            raise
        raise FloorPlanError(str(exc)) from None
    return FloorPlan(access_points=tuple(aps), lamps=tuple(lamps), bounds=bounds)


def load_floorplan(source: str | PathLike | Mapping[str, Any]) -> FloorPlan:
    """Load and validate a floor plan.

    ``source`` may be a parsed mapping, a JSON string, or a path to a JSON file.
    Raises :class:`FloorPlanError` on schema violations, duplicate ids, fewer
    than three access points, collinear access points, or positions outside
    the bounds.
    """
    if isinstance(source, Mapping):
        return floorplan_from_dict(source)
    if isinstance(source, str) and source.lstrip().startswith("{"):
        return floorplan_from_dict(json.loads(source))
    with open(source, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FloorPlanError(f"invalid JSON in {source}: {exc}") from None
    return floorplan_from_dict(doc)


def dump_floorplan(plan: FloorPlan) -> str:
    return json.dumps(plan.to_dict(), indent=2)
