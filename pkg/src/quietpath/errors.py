"""Exception types shared across the package."""


class QuietPathError(Exception):
    """Base class for all package errors."""


class ValidationError(QuietPathError, ValueError):
    """Invalid user input: maps, parameters, paths."""


class DegenerateGeometryError(ValidationError):
    """Geometry that cannot form a polygon (e.g. all points collinear)."""


class DecodeError(QuietPathError):
    """A solver vector could not be turned into a simple s->g path."""


class InfeasibleError(QuietPathError):
    """No plan satisfies the state-of-charge constraints."""


class CertificationError(QuietPathError):
    """An independent check rejected a plan."""

    def __init__(self, message, segment=None, zone=None):
        super().__init__(message)
        self.segment = segment
        self.zone = zone
