"""Exception types raised by the package."""


class CyborgNavError(Exception):
    """Base class for package errors."""


class GeometryError(CyborgNavError, ValueError):
    pass


class DegenerateTargetError(GeometryError):
    """Target coincides with the pose, so no bearing exists."""


class PlantError(CyborgNavError, ValueError):
    pass


class ConfigError(CyborgNavError, ValueError):
    """Invalid configuration; raised before any simulation starts."""


class MetricUndefinedError(CyborgNavError, ValueError):
    """Metric requested for a record it is not defined on (e.g. a failed trial)."""


class DegenerateDataError(CyborgNavError, ValueError):
    pass


class LogFormatError(CyborgNavError, ValueError):
    """Malformed trial log or marker export."""
