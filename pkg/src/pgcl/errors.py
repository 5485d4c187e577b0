from .pc import InconsistentPresentationError, MalformedPresentationError, PresentationError
from .tables import GateExceeded


class HypothesisError(ValueError):
    """An operation's mathematical preconditions do not hold for its input."""


__all__ = [
    "GateExceeded",
    "HypothesisError",
    "InconsistentPresentationError",
    "MalformedPresentationError",
    "PresentationError",
]
