"""Exception types shared across the package.

The CLI maps these onto exit codes: I/O and parsing problems exit with 2,
numeric degeneracies and data inconsistencies exit with 3.
"""


class ShapeError(ValueError):
    """Operands have incompatible shapes."""


class ParseError(ValueError):
    """A data file could not be parsed; message carries the line number."""


class ConsistencyError(ValueError):
    """Two inputs that must agree (e.g. frame and label counts) do not."""


class DegenerateScaleError(ValueError):
    """A data-derived scale (length-scale, kernel rescaling) collapsed to zero."""


class DegenerateInputError(ValueError):
    """Input contains a degenerate row (e.g. all-zero row where a norm is needed)."""


class NumericError(ArithmeticError):
    """A numeric evaluation produced NaN/Inf where a finite value is required."""


class KernelSpecError(ValueError):
    """Kernel parameters violate their constraints."""


class EmptyEvalError(ConsistencyError):
    """Nothing left to evaluate after class exclusion."""
