"""Exception types shared across the toolkit."""


class DeloneKitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DeloneKitError):
    """A point or rectangle left the domain it must live in."""


class RangeError(DeloneKitError):
    """A density violates the admissible range [8/9, 1]."""


class AmbiguousFloor(DeloneKitError):
    """An inexact integral is too close to an integer to take its floor safely."""


class AlignmentError(DeloneKitError):
    """A cell, anchor, or query center is not aligned to the required grid."""


class InfeasibleQuota(DeloneKitError):
    """A cell quota falls outside the feasible [required, capacity] interval."""


class ScheduleError(DeloneKitError):
    """A scale schedule failed validation; carries the list of violations."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class EmptyInput(DeloneKitError):
    """An operation received an empty point set or window."""


class CapacityError(DeloneKitError):
    """An exact search was requested on an input above its size cap."""


class CapExceeded(DeloneKitError):
    """No regularity constant up to the search cap satisfies every sampled ball."""


class DegenerateInput(DeloneKitError):
    """The input is too small for the requested statistic (e.g. a singleton)."""


class InsufficientData(DeloneKitError):
    """Not enough samples, or not enough spread, to run the requested gate."""


class ShapeError(DeloneKitError):
    """Mismatched sizes, denominators, or carriers between two objects."""


class StateError(DeloneKitError):
    """An operation needs state (e.g. a materialized level) that is absent."""


class PreconditionError(DeloneKitError):
    """A documented precondition of a diagnostic does not hold on this input."""


class FormatError(DeloneKitError):
    """A text or JSON artifact does not conform to its declared format."""
