class LocalizationError(ValueError):
    """Base class for every error raised by lifiloc."""


class FloorPlanError(LocalizationError):
    """Malformed or geometrically invalid floor-plan document."""


class DegenerateGeometryError(LocalizationError):
    """Anchors are too few or collinear to fix a 2-D position."""


class CalibrationError(LocalizationError):
    """A Li-Fi trigger could not be applied (unknown lamp, stale snapshot, singular distance)."""


class ScenarioError(LocalizationError):
    """Malformed scenario or trace document."""
