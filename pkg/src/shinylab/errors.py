"""Exception hierarchy shared across the toolkit.

The CLI maps these onto its exit codes: DomainError and its subclasses are
validation failures (exit 2), FormatError covers file/container problems
(exit 3), and MetricError covers numerically undefined results (exit 4).
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ToolkitError, ValueError):
    """An argument or data value is outside the operation's domain."""


class UnsupportedParameterizationError(DomainError):
    """A parameter combination the toolkit deliberately does not model."""


class FormatError(ToolkitError, IOError):
    """A file is not a supported container or its contents are corrupt."""


class MetricError(ToolkitError, ArithmeticError):
    """A statistic or fit is undefined for the given inputs."""


class ExposureError(MetricError):
    """Exposure normalization is impossible (no positive object pixels)."""


class DegenerateFitError(MetricError):
    """A regression cannot be fit (e.g. constant predictor)."""


class MissingDataError(DomainError):
    """A requested experimental condition has no contributing records."""


class CatalogError(DomainError):
    """The stimulus catalog fails an integrity check."""


class SessionConflictError(ToolkitError):
    """An (observer, session) pair was already started."""


class OutOfOrderError(ToolkitError):
    """A rating was submitted for a stimulus other than the current trial."""


class AlreadyRecordedError(ToolkitError):
    """A rating for the current trial was already accepted."""
