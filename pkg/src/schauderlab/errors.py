"""Exception types shared across the package.

The CLI maps these onto exit codes: input problems exit with 2,
numerical failures with 3.
"""


class DocumentError(ValueError):
    """Malformed or inconsistent input document (JSON, CLI argument)."""


class BudgetError(ValueError):
    """An enumeration or iteration budget would be exceeded."""


class ConvergenceError(RuntimeError):
    """An iterative routine failed to bracket or converge."""


class SingularMatrixError(RuntimeError):
    """A matrix that must be invertible is singular or too ill-conditioned."""
