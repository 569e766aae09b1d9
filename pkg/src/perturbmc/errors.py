"""Exception and warning types shared across the package."""


class PerturbMCError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ModelError(PerturbMCError, ValueError):
    """Invalid reaction network, model document or parameter set."""

    exit_code = 2


class StateCapExceeded(ModelError):
    """State enumeration would exceed the configured cap."""


class AssumptionViolation(PerturbMCError):
    """A structural assumption required by the perturbation theory fails.

    Parameters
    ----------
    assumption : int
        Number of the violated assumption (1 to 5).
    message : str
        Human readable description.
    witness : object, optional
        States or classes demonstrating the violation.
    """

    exit_code = 3

    def __init__(self, assumption: int, message: str, witness=None):
        super().__init__(f"assumption {assumption} violated: {message}")
        self.assumption = assumption
        self.witness = witness


class NullityNotOne(AssumptionViolation):
    """The reduced generator does not have a one-dimensional left null space."""

    def __init__(self, nullity: int, message: str = ""):
        text = f"left null space has dimension {nullity}, expected 1"
        if message:
            text = f"{text} ({message})"
        super().__init__(2, text, witness=nullity)
        self.nullity = nullity


class DisconnectedFromTarget(AssumptionViolation):
    """Some state cannot reach the target set, so the passage time is infinite."""

    def __init__(self, states):
        super().__init__(5, f"states {sorted(states)} cannot reach the target set", witness=states)
        self.states = states


class SolverError(PerturbMCError):
    """A linear solve failed or produced an inconsistent result."""

    exit_code = 4


class SingularBlock(SolverError):
    """A block that must be invertible is numerically singular."""

    def __init__(self, block: str, detail: str = ""):
        super().__init__(f"block {block} is numerically singular {detail}".rstrip())
        self.block = block


class NearCancellationWarning(UserWarning):
    """A generator entry lies close to the structural-zero threshold."""


class ZeroLeadingCoefficient(UserWarning):
    """The leading Laurent coefficient of a passage time vanishes."""


class PoleOrderMismatch(UserWarning):
    """Graph-based and algebraic pole orders disagree."""


class ShortHorizonWarning(UserWarning):
    """A simulation horizon is short compared with the slowest time scale."""
