"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when generation or experiment parameters are invalid.

    Carries the offending field names in ``fields`` so callers can report
    exactly what to fix.
    """

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = tuple(fields)


class TopologyError(ValueError):
    """Raised for invalid links, isolated nodes, or unreachable targets."""


class IncompletePlanError(ValueError):
    """Raised when a placement plan does not cover every service."""


class MissingDataError(ValueError):
    """Raised when an aggregation is asked to summarize an empty group."""
