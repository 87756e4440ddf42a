"""Exception hierarchy.

Two families matter to callers: validation errors (bad input, exit code 2
in the CLI) and numerical errors (a solver failed on valid input, exit
code 3).
"""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class UnphysicalStateError(ValidationError):
    """Covariance matrix violates the bona-fide (Heisenberg) condition."""


class NumericalError(RuntimeError):
    """A numerical routine failed on otherwise valid input."""


class NumericalDegeneracyError(NumericalError):
    """Symplectic spectrum could not be extracted reliably."""


class DiscordConvergenceError(NumericalError):
    """Infimum search for Gaussian discord did not converge."""


class NoSteadyStateError(NumericalError):
    """Drift matrix is not Hurwitz, so no steady state exists."""


class StiffnessError(NumericalError):
    """Adaptive step size underflowed; tighten tolerances or shorten t_end."""


class MultistabilityError(NumericalError):
    """Self-consistent cavity field has no stable root to select."""


class InfeasibleStateError(ValidationError):
    """Requested separable-discorded state parameters are not realizable."""
