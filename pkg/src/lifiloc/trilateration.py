"""Range-based position solving.

A linearized least-squares solve seeds a Gauss-Newton refinement of the
range residuals ``|p - c_i| - r_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from lifiloc.calibration import CalibrationState, current_params
from lifiloc.exceptions import DegenerateGeometryError, LocalizationError
from lifiloc.model import FloorPlan, Point2D, RssiSnapshot
from lifiloc.propagation import distance_from_rssi

RANK_TOL = 1e-9
CENTER_NUDGE = 1e-9

BASELINE = "baseline"
CALIBRATED = "calibrated"


@dataclass(frozen=True)
class RangeCircle:
    center: Point2D
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class PositionEstimate:
    position: Point2D
    residual_rms: float
    method: str = BASELINE
    iterations: int = 0
    degenerate: bool = False


def _arrays(circles: Sequence[RangeCircle]) -> tuple[np.ndarray, np.ndarray]:
    if len(circles) < 3:
        raise DegenerateGeometryError(f"need at least 3 range circles, got {len(circles)}")
    centers = np.array([c.center.as_tuple() for c in circles], dtype=float)
    radii = np.array([c.radius for c in circles], dtype=float)
    return centers, radii


def _is_rank_deficient(a: np.ndarray) -> bool:
    s = np.linalg.svd(a, compute_uv=False)
    return s.size < 2 or s[0] == 0.0 or s[-1] <= RANK_TOL * s[0]


def solve_linear(circles: Sequence[RangeCircle]) -> Point2D:
    """Closed-form least-squares intersection of three or more circles.

    Subtracting the first circle's equation from the others cancels the
    quadratic terms, leaving ``A p = b``, solved by ``lstsq``.
    """
    centers, radii = _arrays(circles)
    c0, r0 = centers[0], radii[0]
    a = 2.0 * (centers[1:] - c0)
    b = (r0**2 - radii[1:] ** 2) + np.sum(centers[1:] ** 2, axis=1) - np.dot(c0, c0)
    if _is_rank_deficient(a):
        raise DegenerateGeometryError("circle centers are collinear")
    p, *_ = np.linalg.lstsq(a, b, rcond=None)
    return Point2D(float(p[0]), float(p[1]))


def _residuals(p: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    return np.linalg.norm(centers - p, axis=1) - radii


def range_objective(p, circles: Sequence[RangeCircle]) -> float:
    """Sum of squared range residuals at ``p``."""
    centers, radii = _arrays(circles)
    r = _residuals(np.asarray(p, dtype=float), centers, radii)
    return float(r @ r)


def refine_gauss_newton(
    initial: Point2D,
    circles: Sequence[RangeCircle],
    max_iter: int = 50,
    tol: float = 1e-9,
) -> PositionEstimate:
    """Minimize the squared range residuals starting from ``initial``.

    Each step is halved until it lowers the objective; if no halving helps the
    iteration stops. The result's objective is never above the seed's. A
    rank-deficient Jacobian stops the loop with ``degenerate=True`` and the
    best point seen so far.
    """
    centers, radii = _arrays(circles)
    p = np.array(initial.as_tuple(), dtype=float)
    r = _residuals(p, centers, radii)
    f = float(r @ r)
    degenerate = False
    it = 0
    while it < max_iter:
        it += 1
        base = p
        diff = base - centers
        dist = np.linalg.norm(diff, axis=1)
        if np.any(dist == 0.0):
            # gradient undefined on a center; linearize just off it
            base = base + CENTER_NUDGE
            diff = base - centers
            dist = np.linalg.norm(diff, axis=1)
        jac = diff / dist[:, None]
        if _is_rank_deficient(jac):
            degenerate = True
            break
        step, *_ = np.linalg.lstsq(jac, -_residuals(base, centers, radii), rcond=None)
        accepted = False
        scale = 1.0
        for _ in range(60):
            cand = base + scale * step
            rc = _residuals(cand, centers, radii)
            fc = float(rc @ rc)
            if fc <= f:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            break
        moved = float(np.linalg.norm(cand - p))
        p, f = cand, fc
        if moved < tol:
            break
    rms = math.sqrt(f / len(radii))
    return PositionEstimate(
        position=Point2D(float(p[0]), float(p[1])),
        residual_rms=rms,
        iterations=it,
        degenerate=degenerate,
    )


def locate(
    snapshot: RssiSnapshot,
    state: CalibrationState,
    plan: FloorPlan,
    max_iter: int = 50,
    tol: float = 1e-9,
) -> PositionEstimate:
    """Estimate the receiver position from one RSSI snapshot.

    Each reading is turned into a range with the AP's current exponent, the
    ranges are solved linearly, and the result is refined by Gauss-Newton.
    """
    if len(snapshot.samples) < 3:
        raise DegenerateGeometryError(
            f"need readings from at least 3 access points, got {len(snapshot.samples)}"
        )
    circles = []
    for sample in snapshot.samples:
        ap = plan.access_point(sample.ap_id)
        params = current_params(state, ap)
        if not params.n > 0:
            raise LocalizationError(f"non-positive exponent {params.n} for {ap.id!r}")
        circles.append(RangeCircle(ap.position, distance_from_rssi(params, sample.rssi)))
    seed = solve_linear(circles)
    est = refine_gauss_newton(seed, circles, max_iter=max_iter, tol=tol)
    method = CALIBRATED if state.is_calibrated else BASELINE
    return PositionEstimate(
        position=est.position,
        residual_rms=est.residual_rms,
        method=method,
        iterations=est.iterations,
        degenerate=est.degenerate,
    )
