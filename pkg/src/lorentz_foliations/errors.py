"""Exception hierarchy.  Every error raised on purpose by the toolkit derives from
:class:`FoliationError`, so callers (the CLI in particular) can map them to exit codes."""


class FoliationError(Exception):
    """Base class for toolkit errors."""


class InvalidParams(FoliationError, ValueError):
    pass


class OutOfDomain(FoliationError, ValueError):
    pass


class SignatureViolation(FoliationError):
    pass


class SingularMetric(FoliationError):
    pass


class NotUnitTimelike(FoliationError, ValueError):
    pass


class BadFrameVector(FoliationError, ValueError):
    pass


class NotSpacelikeLeaf(FoliationError):
    pass


class DegenerateFrame(FoliationError):
    pass


class NotLeafTangent(FoliationError, ValueError):
    pass


class LeftDomain(FoliationError):
    """A normal curve reached the chart boundary.  ``curve`` holds the part integrated so far."""

    def __init__(self, message, exit_point=None, curve=None):
        super().__init__(message)
        self.exit_point = exit_point
        self.curve = curve


class NotGeodesicNormal(FoliationError):
    pass


class NotConstantCurvature(FoliationError):
    pass


class RegimeViolation(FoliationError, ValueError):
    pass


class EmptySampleSet(FoliationError, ValueError):
    pass


class NonCompactLeaf(FoliationError):
    pass


class NoUniqueSignature(FoliationError):
    """Sign calibration found zero or several passing signatures.  ``report`` carries the residual table."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BoundViolated(FoliationError):
    """A mean-curvature bound failed; ``report`` holds the offending clause and witness point."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
