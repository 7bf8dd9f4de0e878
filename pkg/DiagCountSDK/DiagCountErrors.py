from typing import Any, Optional


class DiagCountError(Exception):
    """Root of every error raised by DiagCountSDK."""


class InvalidModulusError(DiagCountError, ValueError):
    def __init__(self, message: str, p: Optional[int] = None, k: Optional[int] = None):
        super().__init__(message)
        self.p = p
        self.k = k


class UnsupportedOperationError(DiagCountError, ValueError):
    """An operation that needs a prime-power modulus was given a composite one."""

    def __init__(self, operation: str, modulus: Any):
        super().__init__(f"{operation} requires a prime-power modulus, got {modulus}")
        self.operation = operation
        self.modulus = modulus


class NotInvertibleError(DiagCountError, ValueError):
    def __init__(self, value: Any, modulus: Any, valuation: Any = None):
        message = f"{value} is not invertible modulo {modulus}"
        if valuation is not None:
            message += f" (valuation {valuation})"
        super().__init__(message)
        self.value = value
        self.modulus = modulus
        self.valuation = valuation


class NegativeCountError(DiagCountError, ValueError):
    def __init__(self, p: int, j: int, i: int):
        super().__init__(f"phi_{i}({p}^{j}) is negative: {i} > {p}")
        self.p = p
        self.j = j
        self.i = i


class DimensionMismatchError(DiagCountError, ValueError):
    def __init__(self, left: Any, right: Any):
        super().__init__(f"Dimension or modulus mismatch: {left} vs {right}")
        self.left = left
        self.right = right


class BudgetExceededError(DiagCountError, ValueError):
    def __init__(self, what: str, required: int, budget: int):
        super().__init__(f"{what} needs {required} candidates, budget is {budget}; raise --budget to at least {required}")
        self.what = what
        self.required = required
        self.budget = budget


class InvalidTypeError(DiagCountError, ValueError):
    def __init__(self, message: str, matrix_type: Any = None):
        super().__init__(message)
        self.matrix_type = matrix_type


class InconsistencyError(DiagCountError, ArithmeticError):
    """A division that must be exact left a remainder. Always a bug, never data."""

    def __init__(self, numerator: int, denominator: int, context: str = ""):
        where = f" in {context}" if context else ""
        super().__init__(f"{numerator} is not divisible by {denominator}{where}")
        self.numerator = numerator
        self.denominator = denominator
        self.context = context


class DuplicateEntriesError(DiagCountError, ValueError):
    def __init__(self, entries: Any):
        super().__init__(f"Entries must be distinct, got {list(entries)}; use classify_diagonal for repeated values")
        self.entries = entries


class ReconstructionError(DiagCountError, ValueError):
    pass


class ErratumReportError(DiagCountError, AssertionError):
    def __init__(self, matrix_type: Any, formula_value: int, scanned_value: int):
        super().__init__(
            f"t(T) mismatch for {matrix_type}: formula gives {formula_value}, multiset scan gives {scanned_value}"
        )
        self.matrix_type = matrix_type
        self.formula_value = formula_value
        self.scanned_value = scanned_value


class InvariantError(DiagCountError, AssertionError):
    """A structural invariant (triangle inequality, weight count) failed on constructed data."""


def exact_div(numerator: int, denominator: int, context: str = "") -> int:
    """Divide, refusing to truncate."""
    quotient, remainder = divmod(numerator, denominator)
    if remainder:
        raise InconsistencyError(numerator, denominator, context)
    return quotient
