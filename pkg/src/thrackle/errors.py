"""Exception hierarchy shared across the package."""


class ThrackleError(Exception):
    """Base class for all package-specific errors."""


class InvalidEdge(ThrackleError):
    """Self-loop or otherwise malformed edge."""


class DuplicateEdge(ThrackleError):
    """Repeated vertex pair outside multigraph mode."""


class UnknownEdge(ThrackleError):
    """Edge id not present in the graph."""


class NotConnected(ThrackleError):
    """Operation requires a connected graph."""


class GraphFormatError(ThrackleError):
    """Malformed graph/witness/embedding text input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AdjacentCrossing(ThrackleError):
    """Crossing schedule pairs two edges that share a vertex."""


class InconsistentSchedule(ThrackleError):
    """Crossing schedule violates reciprocity or repeats an entry."""


class NotOddCycle(ThrackleError):
    """Conway doubling applied to an even cycle."""


class NotACycle(ThrackleError):
    """Vertex sequence is not a simple cycle of the graph."""


class DoublingFailed(ThrackleError):
    """Local doubling rules produced a non-validating witness."""


class DegenerateDumbbell(ThrackleError):
    """Dumbbell parameters realize parallel edges or degenerate cycles."""


class InvalidParameters(ThrackleError):
    """Bound or construction parameters outside their stated domain."""


class InfeasibleR(ThrackleError):
    """Closed-form sufficient condition has non-positive denominator."""
