"""Exception types shared across the package."""


class DegenerateClassesError(ValueError):
    """Raised when the two class centers coincide.

    The direction program is meaningless when the estimated centers are
    identical: every lambda grid would collapse and the zero direction is
    the only solution at any penalty level.
    """


class SingularBasisError(RuntimeError):
    """Raised when the simplex working basis cannot be refactorized."""


class SolverFailureError(RuntimeError):
    """Raised when a direction solver cannot certify a usable solution."""
