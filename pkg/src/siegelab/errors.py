"""Exception types shared across the package."""


class SiegelabError(Exception):
    """Base class for all package-specific errors."""


class PrecisionExhausted(SiegelabError):
    """The requested certification cannot be delivered.

    Raised when an input carries too little information (a decimal spec
    with a fixed error bound) or when escalation hit the precision cap
    without resolving an inequality.
    """


class RationalInput(SiegelabError):
    """The rotation number is exactly rational; the operation is undefined."""


class DegenerateRotation(SiegelabError):
    """lambda is a root of unity, so a small divisor vanishes at finite order."""


class TableTooShort(SiegelabError):
    """A convergent table does not reach the depth an operation requires."""


class WeightMissing(SiegelabError):
    """A diagnostic needs a weight sequence that was not supplied."""


class AxiomViolation(SiegelabError):
    """A weight sequence failed one of its defining axioms.

    Carries the axiom name and the witness pair.
    """

    def __init__(self, axiom, witness, message=None):
        self.axiom = axiom
        self.witness = witness
        super().__init__(message or f"axiom {axiom} fails at {witness}")


class EmptyU(SiegelabError):
    """No convergent denominator satisfies q_{j+1} >= (q_j + 1)^2 within depth."""


class BudgetExceeded(SiegelabError):
    """Every witness subsequence point lies beyond the order budget."""
