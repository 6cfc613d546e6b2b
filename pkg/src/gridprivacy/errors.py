"""Exception hierarchy used across the package.

Two branches matter for callers: ``ValidationError`` covers bad input data
or configuration, ``ComputationError`` covers algorithms that fail at
runtime (non-convergence, unsupported graph structure). The CLI maps them
to exit codes 1 and 2.
"""


class GridPrivacyError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GridPrivacyError):
    """Invalid input data, file content, or configuration."""


class ComputationError(GridPrivacyError):
    """A computation could not complete on otherwise valid input."""


# --- topology ---------------------------------------------------------------

class DuplicateNodeIdError(ValidationError):
    """Two node records share the same id."""


class UnknownEndpointError(ValidationError):
    """A link references a node id that is not part of the topology."""


class NonPositiveWeightError(ValidationError):
    """Link weights must be strictly positive."""


class SelfLoopError(ValidationError):
    """A link connects a node to itself."""


class UnknownNodeError(ValidationError):
    """A node id was referenced that does not exist."""


class EigenvectorConvergenceError(ComputationError):
    """Power iteration did not converge within the iteration cap."""


# --- attack graph -----------------------------------------------------------

class UnknownConditionError(ValidationError):
    """An incident precondition names a condition no record or incident defines."""


class NegativeInputError(ValidationError):
    """Risk factors must be non-negative."""


class CyclicAttackGraphError(ComputationError):
    """The attack edge set contains a cycle, so no best path exists."""


# --- privacy ----------------------------------------------------------------

class InvalidBoundsError(ValidationError):
    """Epsilon bounds must satisfy 0 < minimum < maximum."""


class NonPositiveEpsilonError(ValidationError):
    """Privacy loss epsilon must be strictly positive."""


class NonPositiveSensitivityError(ValidationError):
    """Query sensitivity must be strictly positive."""


class MissingAssignmentError(ValidationError):
    """A series node has no epsilon in the active assignment."""


# --- evaluation -------------------------------------------------------------

class LengthMismatchError(ValidationError):
    """Paired series must have equal length."""


class EmptySeriesError(ValidationError):
    """The operation needs at least one data point."""


class ZeroMeanError(ValidationError):
    """Percentage deviation is undefined when the original mean is zero."""


class NonPositiveInputError(ValidationError):
    """All risk-model inputs must be strictly positive."""


# --- ingestion --------------------------------------------------------------

class MalformedRowError(ValidationError):
    """A file row could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateKeyError(ValidationError):
    """Two records share the same (home, timestamp) key."""


class NegativeConsumptionError(ValidationError):
    """Consumption readings must be non-negative."""


class OutOfRangeTimestampError(ValidationError):
    """Timestamps must be minutes of a single day, 0..1439."""


class InvalidCountError(ValidationError):
    """Synthetic generation counts are out of range."""


class UnmappedHomeError(ValidationError):
    """A dataset home is missing from the aggregation map."""
