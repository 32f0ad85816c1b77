"""Wi-Fi RSSI indoor positioning with Li-Fi landmark recalibration of the path-loss exponent."""

from lifiloc.calibration import CalibrationState, LiFiTrigger, current_params, on_lifi_trigger
from lifiloc.estimators import FingerprintLocator, LandmarkCalibratedLocator, PathLossRegressor
from lifiloc.evaluation import (
    ErrorReport,
    Fingerprint,
    LocationDataset,
    calibration_gain,
    distance_error_report,
    fingerprint_build,
    fingerprint_match,
    load_table1,
    reproduce_table1,
)
from lifiloc.exceptions import (
    CalibrationError,
    DegenerateGeometryError,
    FloorPlanError,
    LocalizationError,
    ScenarioError,
)
from lifiloc.model import (
    AccessPoint,
    FloorPlan,
    LiFiLamp,
    PathLossParams,
    Point2D,
    Rect,
    RssiSample,
    RssiSnapshot,
    load_floorplan,
)
from lifiloc.propagation import (
    EnvironmentField,
    Exponent,
    derive_exponent,
    distance_from_rssi,
    fit_exponent_least_squares,
    rssi_from_distance,
    sample_environment,
)
from lifiloc.simulator import Scenario, Trace, detect_lamp, run
from lifiloc.trilateration import (
    PositionEstimate,
    RangeCircle,
    locate,
    refine_gauss_newton,
    solve_linear,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationState",
    "LiFiTrigger",
    "current_params",
    "on_lifi_trigger",
    "FingerprintLocator",
    "LandmarkCalibratedLocator",
    "PathLossRegressor",
    "ErrorReport",
    "Fingerprint",
    "LocationDataset",
    "calibration_gain",
    "distance_error_report",
    "fingerprint_build",
    "fingerprint_match",
    "load_table1",
    "reproduce_table1",
    "CalibrationError",
    "DegenerateGeometryError",
    "FloorPlanError",
    "LocalizationError",
    "ScenarioError",
    "AccessPoint",
    "FloorPlan",
    "LiFiLamp",
    "PathLossParams",
    "Point2D",
    "Rect",
    "RssiSample",
    "RssiSnapshot",
    "load_floorplan",
    "EnvironmentField",
    "Exponent",
    "derive_exponent",
    "distance_from_rssi",
    "fit_exponent_least_squares",
    "rssi_from_distance",
    "sample_environment",
    "Scenario",
    "Trace",
    "detect_lamp",
    "run",
    "PositionEstimate",
    "RangeCircle",
    "locate",
    "refine_gauss_newton",
    "solve_linear",
]
