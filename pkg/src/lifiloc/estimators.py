"""scikit-learn compatible wrappers around the functional core.

Feature matrices hold one column per access point, in floor-plan order;
missing readings are ``NaN``. Targets are ``(n_samples, 2)`` positions.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from lifiloc.calibration import (
    DEFAULT_D0_GUARD,
    DEFAULT_FALLBACK_N,
    CalibrationState,
    LiFiTrigger,
    current_params,
)
from lifiloc.model import N_MAX, N_MIN, FloorPlan, PathLossParams, RssiSample, RssiSnapshot
from lifiloc.propagation import clamp_exponent, distance_from_rssi, fit_exponent_least_squares
from lifiloc.trilateration import locate


def _rows_to_snapshots(X: np.ndarray, ap_ids: list[str]) -> list[RssiSnapshot]:
    snaps = []
    for i, row in enumerate(X):
        samples = tuple(
            RssiSample(ap_id=a, rssi=float(v)) for a, v in zip(ap_ids, row) if not np.isnan(v)
        )
        snaps.append(RssiSnapshot(timestamp=float(i), samples=samples))
    return snaps


class PathLossRegressor(RegressorMixin, BaseEstimator):
    """Fit the exponent of ``rssi = p0 - 10 n ln(d / d0)`` with ``p0`` and ``d0`` fixed.

    ``X`` is a single column of distances (meters), ``y`` the readings.

    Attributes
    ----------
    n_ : float
        Fitted (clamped) exponent.
    clamped_ : bool
        Whether the least-squares optimum fell outside ``[n_min, n_max]``.
    """

    def __init__(self, p0=0.0, d0=1.0, n_min=N_MIN, n_max=N_MAX):
        self.p0 = p0
        self.d0 = d0
        self.n_min = n_min
        self.n_max = n_max

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_features=1)
        if X.shape[1] != 1:
            raise ValueError("PathLossRegressor expects a single distance column")
        n = fit_exponent_least_squares(
            self.p0, self.d0, zip(X[:, 0], y), n_min=self.n_min, n_max=self.n_max
        )
        self.n_ = float(n)
        self.clamped_ = n.clamped
        self.n_features_in_ = 1
        return self

    @property
    def params_(self) -> PathLossParams:
        check_is_fitted(self, "n_")
        return PathLossParams(p0=self.p0, d0=self.d0, n=self.n_)

    def predict(self, X):
        check_is_fitted(self, "n_")
        X = check_array(X)
        d = X[:, 0]
        if np.any(d <= 0):
            raise ValueError("distances must be > 0")
        return self.p0 - 10.0 * self.n_ * np.log(d / self.d0)

    def predict_distance(self, rssi):
        params = self.params_
        rssi = np.asarray(rssi, dtype=float).ravel()
        return np.array([distance_from_rssi(params, r) for r in rssi])


class LandmarkCalibratedLocator(RegressorMixin, BaseEstimator):
    """Trilateration locator whose per-AP exponents come from landmark fixes.

    ``fit`` takes RSSI rows recorded at known anchor positions (lamp centers)
    and derives one exponent per access point by least squares over all
    anchors; with a single anchor this is the closed-form single-pair value.
    ``partial_fit`` instead replaces exponents with those derived from the
    newest anchor only, which is the hold-until-next-landmark behaviour of
    the streaming pipeline.

    Parameters
    ----------
    plan : FloorPlan
    fallback_n : float
        Exponent used for APs that no anchor calibrated.
    d0_guard : float
        Anchors whose distance to an AP is within this of the AP's ``d0`` are
        ignored for that AP.
    """

    def __init__(self, plan: FloorPlan | None = None, fallback_n=DEFAULT_FALLBACK_N,
                 d0_guard=DEFAULT_D0_GUARD, n_min=N_MIN, n_max=N_MAX):
        self.plan = plan
        self.fallback_n = fallback_n
        self.d0_guard = d0_guard
        self.n_min = n_min
        self.n_max = n_max

    def _ap_ids(self):
        if self.plan is None:
            raise ValueError("a FloorPlan is required")
        return [ap.id for ap in self.plan.access_points]

    def _check_X(self, X):
        X = check_array(X, ensure_all_finite="allow-nan")
        if X.shape[1] != len(self._ap_ids()):
            raise ValueError(
                f"X has {X.shape[1]} columns but the plan has {len(self._ap_ids())} access points"
            )
        return X

    def _exponents(self, X, anchors):
        per_ap = {}
        for j, ap in enumerate(self.plan.access_points):
            pairs = []
            for row, (ax, ay) in zip(X, anchors):
                if np.isnan(row[j]):
                    continue
                d = float(np.hypot(ax - ap.position.x, ay - ap.position.y))
                if abs(d - ap.d0) <= self.d0_guard:
                    continue
                pairs.append((d, float(row[j])))
            if pairs:
                per_ap[ap.id] = float(
                    fit_exponent_least_squares(ap.p0, ap.d0, pairs, n_min=self.n_min, n_max=self.n_max)
                )
        return per_ap

    def fit(self, X, y):
        X = self._check_X(X)
        y = check_array(y)
        if y.shape != (X.shape[0], 2):
            raise ValueError("y must be an (n_samples, 2) array of anchor positions")
        self.per_ap_n_ = self._exponents(X, y)
        self.n_features_in_ = X.shape[1]
        return self

    def partial_fit(self, X, y):
        X = self._check_X(X)
        y = check_array(y)
        latest = self._exponents(X[-1:], y[-1:])
        merged = dict(getattr(self, "per_ap_n_", {}))
        merged.update(latest)
        self.per_ap_n_ = merged
        self.n_features_in_ = X.shape[1]
        return self

    def _state(self) -> CalibrationState:
        per_ap = getattr(self, "per_ap_n_", {})
        trig = LiFiTrigger(0.0, "<fit>") if per_ap else None
        return CalibrationState(per_ap_n=dict(per_ap), last_trigger=trig,
                                fallback_n=float(clamp_exponent(self.fallback_n, self.n_min, self.n_max)))

    def exponent_for(self, ap_id: str) -> float:
        check_is_fitted(self, "per_ap_n_")
        return current_params(self._state(), self.plan.access_point(ap_id)).n

    def predict(self, X):
        check_is_fitted(self, "per_ap_n_")
        X = self._check_X(X)
        state = self._state()
        out = np.empty((X.shape[0], 2))
        for i, snap in enumerate(_rows_to_snapshots(X, self._ap_ids())):
            p = locate(snap, state, self.plan).position
            out[i] = (p.x, p.y)
        return out

    def score(self, X, y, sample_weight=None):
        """Negative mean Euclidean position error (higher is better)."""
        y = check_array(y)
        err = np.hypot(*(self.predict(X) - y).T)
        return -float(np.average(err, weights=sample_weight))


class FingerprintLocator(BaseEstimator):
    """Nearest-neighbour lookup in RSSI space over a surveyed grid.

    ``fit`` is the offline survey; ``predict`` returns the grid position whose
    reference row is closest over the columns observed in both rows. Ties go
    to the smallest ``(x, y)``.
    """

    def __init__(self, tie_tol=1e-12):
        self.tie_tol = tie_tol

    def fit(self, X, y):
        X = check_array(X, ensure_all_finite="allow-nan")
        y = check_array(y)
        if y.shape != (X.shape[0], 2):
            raise ValueError("y must be an (n_samples, 2) array of grid positions")
        self.references_ = X
        self.positions_ = y
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "references_")
        X = check_array(X, ensure_all_finite="allow-nan")
        order = np.lexsort((self.positions_[:, 1], self.positions_[:, 0]))
        refs, pos = self.references_[order], self.positions_[order]
        out = np.empty((X.shape[0], 2))
        for i, row in enumerate(X):
            diff = refs - row
            mask = ~np.isnan(diff)
            if not mask.any(axis=1).any():
                raise ValueError(f"row {i} shares no observed columns with the survey")
            dist = np.sqrt(np.nansum(diff**2, axis=1))
            dist[~mask.any(axis=1)] = np.inf
            best = dist.min()
            k = int(np.argmax(dist <= best + self.tie_tol * max(1.0, best)))
            out[i] = pos[k]
        return out


def fingerprint_arrays(fp, ap_ids: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Flatten a :class:`~lifiloc.evaluation.Fingerprint` into ``(X, y)`` for :class:`FingerprintLocator`."""
    X = np.full((len(fp.grid), len(ap_ids)), np.nan)
    y = np.empty((len(fp.grid), 2))
    col = {a: j for j, a in enumerate(ap_ids)}
    for i, (p, snap) in enumerate(fp.grid):
        y[i] = (p.x, p.y)
        for s in snap.samples:
            if s.ap_id in col:
                X[i, col[s.ap_id]] = s.rssi
    return X, y
