"""Exception hierarchy. Every error carries a stable ``code`` for the CLI."""


class TomographyError(Exception):
    code = "TomographyError"


class ValidationError(TomographyError, ValueError):
    code = "ValidationError"


class NotHermitian(ValidationError):
    code = "NotHermitian"


class NotPositive(ValidationError):
    code = "NotPositive"


class TraceNotOne(ValidationError):
    code = "TraceNotOne"


class DimensionMismatch(ValidationError):
    code = "DimensionMismatch"


class DimensionTooLarge(ValidationError):
    code = "DimensionTooLarge"


class EtaOutOfRange(ValidationError):
    code = "EtaOutOfRange"


class NegativeArgument(ValidationError):
    code = "NegativeArgument"


class ProbabilityOutOfRange(ValidationError):
    code = "ProbabilityOutOfRange"


class SolverFailure(TomographyError, ArithmeticError):
    code = "SolverFailure"


class DegenerateState(TomographyError, ArithmeticError):
    code = "DegenerateState"


class ZeroProbability(TomographyError, ArithmeticError):
    """An observed event has (numerically) zero probability under the state."""
    code = "ZeroProbability"


class BoundOverflow(TomographyError, OverflowError):
    code = "Overflow"


class DegenerateUpdate(TomographyError, ArithmeticError):
    code = "DegenerateUpdate"


class NonPositiveUpdate(DegenerateUpdate):
    code = "NonPositiveUpdate"


class BracketFailure(TomographyError):
    """The multiplier search could not reach the target statistic."""
    code = "BracketFailure"
