"""Exception hierarchy.

``InputError`` covers malformed user input (exit code 2 in the CLI);
``DegenerateError`` covers numerical degeneracy of otherwise valid input
(exit code 3).
"""


class CorrCusumError(Exception):
    """Base class for all package errors."""


class InputError(CorrCusumError, ValueError):
    """Malformed or out-of-contract input."""


class DegenerateError(CorrCusumError, ArithmeticError):
    """Input is well formed but numerically degenerate."""


class NotPositiveDefiniteError(DegenerateError):
    """A matrix that must be positive definite is not.

    Attributes
    ----------
    min_eigenvalue : float
        Smallest eigenvalue found (after ridging, if a ridge was tried).
    """

    def __init__(self, message, min_eigenvalue=float("nan")):
        super().__init__(message)
        self.min_eigenvalue = float(min_eigenvalue)
