"""Exception types shared across fluxqc modules."""


class ConsistencyError(ValueError):
    """An input violates a structural precondition (label mismatch, broken symmetry)."""


class ConvergenceError(RuntimeError):
    """An iterative numerical procedure failed its self-consistency check."""


class TopologyError(RuntimeError):
    """The ground-space structure changed along a path where it must stay constant."""


class CompileError(ValueError):
    """A logical operation cannot be lowered to a flux schedule on the given layout."""


class ReplayError(ValueError):
    """A forced measurement outcome has zero probability in the current state."""


class SingularityError(ValueError):
    """Evaluation requested too close to a pole of a closed-form expression."""


class RegimeWarning(UserWarning):
    """A formula is being used outside its documented validity regime."""
