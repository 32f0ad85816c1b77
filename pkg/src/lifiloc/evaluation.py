"""Error metrics, survey-site exponents, trace replay and a fingerprinting baseline."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

from lifiloc.calibration import DEFAULT_FALLBACK_N, CalibrationState, LiFiTrigger, on_lifi_trigger
from lifiloc.exceptions import LocalizationError
from lifiloc.model import FloorPlan, PathLossParams, Point2D, RssiSnapshot
from lifiloc.propagation import EnvironmentField, derive_exponent, distance_from_rssi, sample_environment
from lifiloc.simulator import Trace
from lifiloc.trilateration import locate

# Published "Derived n value" row, locations #1..#5.
PUBLISHED_TABLE1_N = (0.3338, 0.2337, 0.3004, 0.4006, 0.3004)
TABLE1_TOL = 1e-4
TABLE1_ENDPOINT_D = 20.0


@dataclass(frozen=True)
class LocationDataset:
    label: str
    p0: float
    d0: float
    rows: tuple[tuple[float, float], ...]

    def __post_init__(self):
        rows = tuple((float(d), float(r)) for d, r in self.rows)
        object.__setattr__(self, "rows", rows)
        ds = [d for d, _ in rows]
        if any(b <= a for a, b in zip(ds, ds[1:])):
            raise ValueError(f"{self.label}: distances must be strictly increasing")
        if not any(d == self.d0 and r == self.p0 for d, r in rows):
            raise ValueError(f"{self.label}: rows must include the reference row (d0, p0)")

    def rssi_at(self, d: float) -> float:
        for dd, r in self.rows:
            if dd == d:
                return r
        raise KeyError(f"{self.label}: no row at {d} m")


@dataclass(frozen=True)
class ErrorReport:
    mean_abs_error: float
    rmse: float
    per_point: tuple[tuple[float, float, float], ...]
    n_used: float

    @property
    def max_abs_error(self) -> float:
        return max(e for _, _, e in self.per_point)

    def summary(self) -> dict:
        return {
            "n_used": self.n_used,
            "mean_abs_error": self.mean_abs_error,
            "rmse": self.rmse,
            "max_abs_error": self.max_abs_error,
            "points": len(self.per_point),
        }


def distance_error_report(data: LocationDataset, n: float) -> ErrorReport:
    """Distance-domain prediction errors of the model with exponent ``n``.

    Every row, including the reference row (which contributes zero), enters the mean.
    """
    if not n > 0:
        raise ValueError(f"exponent must be > 0, got {n}")
    params = PathLossParams(p0=data.p0, d0=data.d0, n=n)
    per_point = []
    for d, rssi in data.rows:
        pred = distance_from_rssi(params, rssi)
        per_point.append((d, pred, abs(pred - d)))
    errs = np.array([e for _, _, e in per_point])
    return ErrorReport(
        mean_abs_error=float(errs.mean()),
        rmse=float(math.sqrt(np.mean(errs**2))),
        per_point=tuple(per_point),
        n_used=float(n),
    )


def reproduce_table1(datasets: Sequence[LocationDataset], endpoint: float = TABLE1_ENDPOINT_D) -> list[float]:
    """Derive one exponent per location from the reference row and the ``endpoint`` row."""
    return [
        float(derive_exponent(ds.p0, ds.rssi_at(endpoint), endpoint, ds.d0)) for ds in datasets
    ]


def calibration_gain(data: LocationDataset, calibrated_n: float, baseline_n: float) -> float:
    """Fractional error reduction of ``calibrated_n`` relative to ``baseline_n``."""
    base = distance_error_report(data, baseline_n).mean_abs_error
    if base == 0.0:
        raise ZeroDivisionError("baseline error is zero; gain undefined")
    cal = distance_error_report(data, calibrated_n).mean_abs_error
    return 1.0 - cal / base


def dominance_table(datasets: Sequence[LocationDataset], exponents: Sequence[float]) -> np.ndarray:
    """``table[i, j]`` is the mean error of dataset ``i`` under exponent ``j``."""
    return np.array(
        [[distance_error_report(ds, n).mean_abs_error for n in exponents] for ds in datasets]
    )


# --- survey fixture file -----------------------------------------------------------


def parse_table1(text: str) -> list[LocationDataset]:
    """Parse the survey CSV: a ``distance_m`` column followed by one column per location.

    Values may carry a trailing ``%``. The first row is the reference row.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if len(rows) < 3:
        raise ValueError("table fixture is empty or has too few rows")
    header = [h.strip() for h in rows[0]]
    if header[0] != "distance_m" or len(header) < 2:
        raise ValueError("table fixture must start with a distance_m column")
    body = [[float(c.strip().rstrip("%")) for c in r] for r in rows[1:]]
    if any(len(r) != len(header) for r in body):
        raise ValueError("ragged table fixture")
    d0 = body[0][0]
    out = []
    for j, label in enumerate(header[1:], 1):
        out.append(
            LocationDataset(
                label=label,
                p0=body[0][j],
                d0=d0,
                rows=tuple((r[0], r[j]) for r in body),
            )
        )
    return out


def load_table1(path: str | PathLike | None = None) -> list[LocationDataset]:
    """Load the five-site survey; with no path, the copy bundled in ``lifiloc/data``."""
    if path is None:
        text = resources.files("lifiloc.data").joinpath("table1.csv").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_table1(text)


def write_error_report_csv(report: ErrorReport, fh, label: str = "") -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["label", "n_used", "d_m", "predicted_d_m", "abs_error_m"])
    for d, pred, err in report.per_point:
        w.writerow([label, repr(report.n_used), repr(d), repr(pred), repr(err)])


def error_report_json(report: ErrorReport, label: str = "") -> str:
    return json.dumps({"label": label, **report.summary()}, indent=2)


# --- trace replay ----------------------------------------------------------------


@dataclass(frozen=True)
class LocateRow:
    t: float
    est_x: float | None
    est_y: float | None
    truth_x: float | None
    truth_y: float | None
    err_m: float | None
    method: str
    residual_rms: float | None

    @property
    def ok(self) -> bool:
        return self.method != "error"


LOCATE_COLUMNS = ("t", "est_x", "est_y", "truth_x", "truth_y", "err_m", "method", "residual_rms")


def _paired_snapshot(events: Sequence, i: int, window: float) -> RssiSnapshot | None:
    """Snapshot nearest in time to the trigger at ``events[i]``, earlier on ties."""
    t = events[i].timestamp
    best = None
    for j, ev in enumerate(events):
        if isinstance(ev, RssiSnapshot) and abs(ev.timestamp - t) <= window:
            key = (abs(ev.timestamp - t), ev.timestamp, j)
            if best is None or key < best[0]:
                best = (key, ev)
    return None if best is None else best[1]


def replay_trace(
    trace: Trace,
    plan: FloorPlan,
    fallback_n: float = DEFAULT_FALLBACK_N,
    calibrate: bool = True,
    clamp: bool = False,
    staleness: float = 1.0,
) -> list[LocateRow]:
    """Run calibration and localization over a trace in event order.

    A trigger is paired with the snapshot nearest to it in time (within
    ``staleness``); the trigger is applied before any snapshot that follows
    it in the trace. Snapshots that cannot be solved yield an ``error`` row.
    """
    state = CalibrationState(fallback_n=fallback_n)
    truth = dict(trace.ground_truth)
    rows: list[LocateRow] = []
    events = trace.events
    b = plan.bounds
    for i, ev in enumerate(events):
        if isinstance(ev, LiFiTrigger):
            if not calibrate:
                continue
            snap = _paired_snapshot(events, i, staleness)
            if snap is None:
                continue
            try:
                state = on_lifi_trigger(state, ev, plan, snap, staleness=staleness)
            except LocalizationError:
                continue
            continue
        gt = truth.get(ev.timestamp)
        tx, ty = (gt.x, gt.y) if gt is not None else (None, None)
        try:
            est = locate(ev, state, plan)
        except LocalizationError:
            rows.append(LocateRow(ev.timestamp, None, None, tx, ty, None, "error", None))
            continue
        x, y = est.position.x, est.position.y
        if clamp:
            x = min(max(x, b.min_x), b.max_x)
            y = min(max(y, b.min_y), b.max_y)
        err = math.hypot(x - tx, y - ty) if gt is not None else None
        rows.append(LocateRow(ev.timestamp, x, y, tx, ty, err, est.method, est.residual_rms))
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_locate_csv(rows: Iterable[LocateRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(LOCATE_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in LOCATE_COLUMNS])


def read_locate_csv(fh) -> list[LocateRow]:
    out = []
    for rec in csv.DictReader(fh):
        vals = {}
        for c in LOCATE_COLUMNS:
            raw = rec[c]
            if c == "method":
                vals[c] = raw
            else:
                vals[c] = float(raw) if raw != "" else None
        out.append(LocateRow(**vals))
    return out


# --- fingerprinting baseline -----------------------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    """Offline survey: one reference snapshot per grid point."""

    grid: tuple[tuple[Point2D, RssiSnapshot], ...]

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(self.grid))
        if not self.grid:
            raise ValueError("fingerprint grid is empty")
        pts = [p for p, _ in self.grid]
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate grid point in fingerprint")


def fingerprint_build(plan: FloorPlan, field: EnvironmentField, grid_step: float) -> Fingerprint:
    """Noiseless reference snapshot at every grid point inside the plan bounds."""
    if not grid_step > 0:
        raise ValueError("grid_step must be > 0")
    b = plan.bounds
    nx = int(math.floor((b.max_x - b.min_x) / grid_step + 1e-9)) + 1
    ny = int(math.floor((b.max_y - b.min_y) / grid_step + 1e-9)) + 1
    noiseless = EnvironmentField(
        regions=field.regions,
        default_n=field.default_n,
        noise_sigma=0.0,
        n_min=field.n_min,
        n_max=field.n_max,
    )
    grid = []
    for i in range(nx):
        for j in range(ny):
            p = Point2D(b.min_x + i * grid_step, b.min_y + j * grid_step)
            if not b.contains(p):
                continue
            samples = tuple(sample_environment(noiseless, ap, p) for ap in plan.access_points)
            grid.append((p, RssiSnapshot(timestamp=0.0, samples=samples)))
    if not grid:
        raise ValueError("fingerprint grid is empty")
    return Fingerprint(grid=tuple(grid))


def fingerprint_match(fp: Fingerprint, snapshot: RssiSnapshot, tie_tol: float = 1e-12) -> Point2D:
    """Nearest grid point in RSSI space over the APs both sides share.

    Distances within ``tie_tol`` (relative) count as ties; the smallest
    ``(x, y)`` wins.
    """
    live = {s.ap_id: s.rssi for s in snapshot.samples}
    best_d = math.inf
    cands: list[tuple[float, Point2D]] = []
    for p, ref in fp.grid:
        shared = [(live[s.ap_id], s.rssi) for s in ref.samples if s.ap_id in live]
        if not shared:
            continue
        d = math.sqrt(sum((a - r) ** 2 for a, r in shared))
        cands.append((d, p))
        best_d = min(best_d, d)
    if not cands:
        raise LocalizationError("snapshot shares no access points with the fingerprint")
    thresh = best_d + tie_tol * max(1.0, best_d)
    tied = [p for d, p in cands if d <= thresh]
    return min(tied, key=lambda p: (p.x, p.y))
