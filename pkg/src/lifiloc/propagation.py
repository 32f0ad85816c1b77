"""Log-distance propagation model, its inversions, and the simulated RSSI field.

The model is::

    rssi(d) = p0 - 10 * n * ln(d / d0)

with the NATURAL logarithm. The distance inversion is written with ``exp``,
and only ``ln`` reproduces the measured exponents that ship with this package
(e.g. ``(26 - 16) / (10 * ln 20) = 0.3338``; base-10 would give 0.7686).
Do not switch to ``log10``: ``tests/test_propagation.py::test_table1_log_base_canary``
guards this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from lifiloc.model import N_MAX, N_MIN, AccessPoint, PathLossParams, Point2D, Rect, RssiSample


class Exponent(float):
    """A path-loss exponent that remembers whether it was clamped.

    Behaves as a plain ``float``; ``raw`` holds the unclamped value.
    """

    clamped: bool
    raw: float

    def __new__(cls, value: float, raw: float | None = None):
        obj = super().__new__(cls, value)
        obj.raw = float(value) if raw is None else float(raw)
        obj.clamped = obj.raw != float(value)
        return obj

    def __repr__(self):
        if self.clamped:
            return f"Exponent({float(self)!r}, raw={self.raw!r})"
        return f"Exponent({float(self)!r})"


def clamp_exponent(n: float, n_min: float = N_MIN, n_max: float = N_MAX) -> Exponent:
    if not math.isfinite(n):
        raise ValueError(f"exponent is not finite: {n}")
    return Exponent(min(max(n, n_min), n_max), raw=n)


def rssi_from_distance(params: PathLossParams, d: float) -> float:
    if not d > 0:
        raise ValueError(f"distance must be > 0, got {d}")
    return params.p0 - 10.0 * params.n * math.log(d / params.d0)


def distance_from_rssi(params: PathLossParams, rssi: float) -> float:
    if not params.n > 0:
        raise ValueError(f"path-loss exponent must be > 0 to invert, got {params.n}")
    return params.d0 * math.exp((params.p0 - rssi) / (10.0 * params.n))


def derive_exponent(
    p0: float,
    px: float,
    d: float,
    d0: float,
    n_min: float = N_MIN,
    n_max: float = N_MAX,
) -> Exponent:
    """Solve the model for ``n`` from one (distance, rssi) pair.

    Raises ``ValueError`` when ``d == d0`` (the log term vanishes) or when
    either distance is non-positive. Out-of-range results are clamped to
    ``[n_min, n_max]``; the returned :class:`Exponent` carries ``clamped``.
    """
    if not (d > 0 and d0 > 0):
        raise ValueError("distances must be > 0")
    log_ratio = math.log(d / d0)
    if log_ratio == 0.0:
        raise ValueError("cannot derive an exponent at the reference distance (d == d0)")
    return clamp_exponent((p0 - px) / (10.0 * log_ratio), n_min, n_max)


def fit_exponent_least_squares(
    p0: float,
    d0: float,
    samples: Iterable[tuple[float, float]],
    n_min: float = N_MIN,
    n_max: float = N_MAX,
) -> Exponent:
    """Least-squares exponent over several ``(d, px)`` pairs with ``p0``, ``d0`` fixed.

    Samples taken at ``d == d0`` carry no information about ``n`` and are skipped.
    """
    num = 0.0
    den = 0.0
    for d, px in samples:
        if not d > 0:
            raise ValueError(f"distance must be > 0, got {d}")
        b = 10.0 * math.log(d / d0)
        if b == 0.0:
            continue
        num += (p0 - px) * b
        den += b * b
    if den == 0.0:
        raise ValueError("no usable samples (need at least one with d != d0)")
    return clamp_exponent(num / den, n_min, n_max)


@dataclass(frozen=True)
class EnvironmentField:
    """Ground-truth exponent map used by the simulator.

    ``regions`` are ``(Rect, n)`` pairs searched in order; the first rectangle
    containing the query point wins, otherwise ``default_n`` applies.
    """

    regions: tuple[tuple[Rect, float], ...] = ()
    default_n: float = 0.31378
    noise_sigma: float = 0.0
    n_min: float = N_MIN
    n_max: float = N_MAX

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple((r, float(n)) for r, n in self.regions))
        for n in [self.default_n, *(n for _, n in self.regions)]:
            if not self.n_min <= n <= self.n_max:
                raise ValueError(f"field exponent {n} outside [{self.n_min}, {self.n_max}]")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")

    def exponent_at(self, p: Point2D) -> float:
        for rect, n in self.regions:
            if rect.contains(p):
                return n
        return self.default_n

    def to_dict(self) -> dict:
        return {
            "regions": [{"rect": r.to_dict(), "n": n} for r, n in self.regions],
            "default_n": self.default_n,
            "noise_sigma": self.noise_sigma,
        }


def sample_environment(
    field: EnvironmentField,
    ap: AccessPoint,
    at: Point2D,
    rng: np.random.Generator | None = None,
) -> RssiSample:
    """Draw one RSSI reading of ``ap`` at ``at``.

    Distances closer than ``ap.d0`` are floored to ``d0``. ``rng`` may be
    omitted only when ``field.noise_sigma == 0``.
    """
    d = max(ap.position.distance_to(at), ap.d0)
    params = PathLossParams(p0=ap.p0, d0=ap.d0, n=field.exponent_at(at))
    rssi = rssi_from_distance(params, d)
    if field.noise_sigma > 0:
        if rng is None:
            raise ValueError("an rng is required when noise_sigma > 0")
        rssi += float(rng.normal(0.0, field.noise_sigma))
    return RssiSample(ap_id=ap.id, rssi=rssi, true_distance=d)


def model_curve(params: PathLossParams, distances: Sequence[float]) -> np.ndarray:
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be > 0")
    return params.p0 - 10.0 * params.n * np.log(d / params.d0)
