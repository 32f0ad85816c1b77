"""Landmark recalibration of per-AP path-loss exponents.

When the receiver sees a Li-Fi lamp, its position is known to within the
lamp's lighting disc. The lamp center is taken as the anchor, the distance to
each access point is read off the floor plan, and every AP heard in the paired
RSSI snapshot gets a freshly derived exponent. Those exponents are then held
until the next trigger.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from lifiloc.exceptions import CalibrationError
from lifiloc.model import N_MAX, N_MIN, AccessPoint, FloorPlan, PathLossParams, RssiSnapshot
from lifiloc.propagation import derive_exponent

DEFAULT_FALLBACK_N = 0.31378  # mean of the five survey-site exponents
DEFAULT_STALENESS = 1.0
DEFAULT_D0_GUARD = 0.1


@dataclass(frozen=True)
class LiFiTrigger:
    timestamp: float
    lamp_id: str


@dataclass(frozen=True)
class CalibrationState:
    """Per-AP exponents plus the provenance of the trigger that last touched them.

    ``clamped`` lists APs whose current exponent hit the clamp range.
    Treat instances as values: transitions return new objects.
    """

    per_ap_n: dict[str, float] = field(default_factory=dict)
    last_trigger: LiFiTrigger | None = None
    fallback_n: float = DEFAULT_FALLBACK_N
    clamped: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.per_ap_n and self.last_trigger is None:
            raise ValueError("per-AP exponents require a recorded trigger")

    @property
    def is_calibrated(self) -> bool:
        return self.last_trigger is not None


def on_lifi_trigger(
    state: CalibrationState,
    trigger: LiFiTrigger,
    plan: FloorPlan,
    snapshot: RssiSnapshot,
    staleness: float = DEFAULT_STALENESS,
    d0_guard: float = DEFAULT_D0_GUARD,
    n_min: float = N_MIN,
    n_max: float = N_MAX,
) -> CalibrationState:
    """Apply one lamp trigger and return the updated state.

    APs whose distance to the lamp center is within ``d0_guard`` of their
    reference distance keep their previous exponent, as do APs missing from
    the snapshot.
    """
    if not plan.has_lamp(trigger.lamp_id):
        raise CalibrationError(f"trigger references unknown lamp {trigger.lamp_id!r}")
    if abs(snapshot.timestamp - trigger.timestamp) > staleness:
        raise CalibrationError(
            f"snapshot at t={snapshot.timestamp} is stale for trigger at t={trigger.timestamp}"
            f" (window {staleness} s)"
        )
    anchor = plan.lamp(trigger.lamp_id).position
    per_ap_n = dict(state.per_ap_n)
    clamped = set(state.clamped)
    for sample in snapshot.samples:
        ap = plan.access_point(sample.ap_id)
        d = anchor.distance_to(ap.position)
        if abs(d - ap.d0) <= d0_guard:
            continue
        n = derive_exponent(ap.p0, sample.rssi, d, ap.d0, n_min=n_min, n_max=n_max)
        per_ap_n[ap.id] = float(n)
        if n.clamped:
            clamped.add(ap.id)
        else:
            clamped.discard(ap.id)
    return replace(state, per_ap_n=per_ap_n, last_trigger=trigger, clamped=frozenset(clamped))


def current_params(state: CalibrationState, ap: AccessPoint) -> PathLossParams:
    return PathLossParams(p0=ap.p0, d0=ap.d0, n=state.per_ap_n.get(ap.id, state.fallback_n))
