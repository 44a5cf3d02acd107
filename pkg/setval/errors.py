"""Exceptions raised throughout setval"""


class SetValuedError(Exception):
    """Base class for all errors raised by this library"""
    pass


class OrderViolation(SetValuedError, ValueError):
    """Lower endpoint above upper endpoint. ``location`` holds the
    first offending index when one is known"""
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class NonFinite(SetValuedError, ValueError):
    pass


class DimensionMismatch(SetValuedError, ValueError):
    pass


class EmptyFamily(SetValuedError, ValueError):
    pass


class NotInterval(SetValuedError, ValueError):
    pass


class NotAdapted(SetValuedError, ValueError):
    pass


class LengthMismatch(SetValuedError, ValueError):
    pass


class GridMismatch(SetValuedError, ValueError):
    pass


class InvalidConfig(SetValuedError, ValueError):
    pass


class UnknownExperiment(SetValuedError, KeyError):
    pass


class NotMartingale(SetValuedError):
    pass


class NotRepresentable(SetValuedError):
    pass


class Inconsistent(SetValuedError):
    """The width criterion and the Castaing-difference criterion
    disagree. Never expected; indicates a bug."""
    pass


class _ReportCarrier(SetValuedError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DegenerateInput(_ReportCarrier):
    """Integrand is point-valued everywhere; ``report`` certifies the
    classical martingale case instead"""
    pass


class IdenticalIntegrands(_ReportCarrier):
    """Both integrands agree everywhere; ``report`` describes the
    degenerate segment process"""
    pass


class IoError(SetValuedError, OSError):
    """A report or input file could not be read or written"""
    pass


class IncompleteProcess(SetValuedError, ValueError):
    """A tree process has no value at some node of a level"""
    pass
