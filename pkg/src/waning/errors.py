"""Exception hierarchy.

Every data-level failure raised by the library derives from :class:`WaningError`
so the CLI can map it to exit status 1 in one place.
"""


class WaningError(ValueError):
    """Base class for data and domain errors."""


class MalformedInput(WaningError):
    """Input document does not follow the expected schema."""


class InvalidCounts(WaningError):
    """Counts violate a structural invariant (e.g. more events than participants)."""


class EmptyInput(WaningError):
    pass


class ZeroEvents(WaningError):
    """An event count needed as a ratio denominator or variance term is zero."""

    def __init__(self, arm, period, message=None):
        self.arm = arm
        self.period = period
        super().__init__(message or f"zero events in arm {arm}, period {period}")


class WrongMode(WaningError):
    """Operation is not defined for the summary's denominator mode."""


class DegenerateResampling(WaningError):
    """Too many bootstrap resamples had an empty cell, or the percentile CI is degenerate."""


class DomainError(WaningError):
    """Argument outside its mathematical domain."""


class Infeasible(WaningError):
    """Requested waning factor needs a transition rate above 1."""

    def __init__(self, message, w_max):
        self.w_max = w_max
        super().__init__(message)


class ZeroStratum(WaningError):
    """The stratum that a waning scenario draws transitions from has probability 0."""


class ZeroDenominator(WaningError):
    pass
