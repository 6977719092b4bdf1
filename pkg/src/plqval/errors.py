"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`PLQValError`,
so callers (the CLI in particular) can tell contract violations apart from
programming mistakes.
"""


class PLQValError(ValueError):
    """Base class for all package errors."""


class InvalidPLQ(PLQValError):
    """A piece list violates a PLQ invariant.

    ``piece_index`` names the first offending piece (or junction, counted by
    the piece on its left); it is ``None`` for whole-function problems.
    """

    def __init__(self, message, piece_index=None):
        self.piece_index = piece_index
        if piece_index is not None:
            message = f"piece {piece_index}: {message}"
        super().__init__(message)


class EmptyDomain(PLQValError):
    """The result would have an empty domain (not a proper function)."""


class NotConvex(PLQValError):
    """A pointwise minimum is not convex."""


class DisconnectedDomain(PLQValError):
    """The union of two domains is not an interval."""


class InconsistentC0(PLQValError):
    """Point-indicator values disagree across locations."""


class NotAdditive(PLQValError):
    """Interval-indicator values fail Cauchy additivity."""


class MDependent(PLQValError):
    """The extracted curvature density depends on the probe half-width."""


class MissingProbe(PLQValError):
    """A probe table has no entry for a requested probe function."""

    def __init__(self, names):
        self.names = list(names)
        super().__init__("missing probes: " + ", ".join(self.names))


class NotSettled(PLQValError):
    """An endpoint sequence does not settle within tolerance on its tail."""


class InvalidParams(PLQValError):
    """Construction parameters violate their ordering constraints."""


class ParallelSupportLines(PLQValError):
    """Support lines at the two endpoints do not intersect."""


class EpsilonTooLarge(PLQValError):
    """The requested window leaves the admissible region."""


class BudgetExceeded(PLQValError):
    """Refinement hit its floor without meeting the certificate bound."""


class GeneratorStarved(PLQValError):
    """Rejection sampling accepted too few candidates."""
