"""Exception types shared across the toolkit.

Every error raised by lipkit derives from :class:`LipkitError`, so callers
(and the CLI) can distinguish precondition violations from ordinary bugs.
Errors that carry a witness expose it as an attribute.
"""

from __future__ import annotations


class LipkitError(Exception):
    """Base class for all toolkit errors."""


class ArgumentError(LipkitError, ValueError):
    """An argument violates a documented precondition."""


class DomainMismatchError(LipkitError, ValueError):
    """A point does not belong to the domain it is used with."""


class MetricViolationError(LipkitError, ValueError):
    """A distance matrix fails one or more metric axioms."""

    def __init__(self, violations) -> None:
        self.violations = list(violations)
        shown = "; ".join(str(v) for v in self.violations[:3])
        more = len(self.violations) - 3
        if more > 0:
            shown += f"; and {more} more"
        super().__init__(f"metric axioms violated: {shown}")


class AdmissibilityError(LipkitError, ValueError):
    """Anchor values are too steep for the requested Lipschitz constants.

    ``witness`` is the offending anchor index pair.
    """

    def __init__(self, message: str, witness: tuple[int, int]) -> None:
        self.witness = witness
        super().__init__(message)


class EmptyWindowError(LipkitError, ValueError):
    """A windowed evaluation found no anchor inside the window."""

    def __init__(self, point, window: float) -> None:
        self.point = point
        self.window = window
        super().__init__(
            f"empty window: no anchor within {window!r} of query {point!r}"
        )


class UnsupportedDomainError(LipkitError, TypeError):
    """The operation requires a different kind of metric domain."""


class UncoveredPointError(LipkitError, ValueError):
    """A point lies outside every set of a cover that should contain it."""

    def __init__(self, point) -> None:
        self.point = point
        super().__init__(f"cover property violated: point {point!r} lies in no cover set")


class InconsistencyError(LipkitError, ValueError):
    """Mutually exclusive conditions hold at the same point."""


class RangeError(LipkitError, ValueError):
    """A value falls outside the range an operation is defined on."""
