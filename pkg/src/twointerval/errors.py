"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class WrongPathError(ValueError):
    """Operation called in a w-regime it does not handle (e.g. solveBranch at w=0)."""


class StructuralError(ValueError):
    """Operation requires a length tag (rational/irrational) that is missing or wrong."""


class SolverError(RuntimeError):
    """A root bracket or refinement failed."""
