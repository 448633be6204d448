"""Exception hierarchy. Every error carries a stable machine-readable ``code``."""


class KostantError(Exception):
    code = "ERROR"

    def __init__(self, message="", *, residual=None):
        super().__init__(message)
        self.residual = residual


class ArityMismatch(KostantError, ValueError):
    code = "ARITY_MISMATCH"


class OrderMismatch(KostantError, ValueError):
    code = "ORDER_MISMATCH"


class IndexOutOfRange(KostantError, IndexError):
    code = "INDEX_OUT_OF_RANGE"


class InvalidSpec(KostantError, ValueError):
    code = "INVALID_SPEC"


class UndefinedOnAxes(KostantError, ValueError):
    code = "UNDEFINED_ON_AXES"


class NonzeroConstantTerm(KostantError, ValueError):
    code = "NONZERO_CONSTANT_TERM"


class QuadratureFailure(KostantError, RuntimeError):
    code = "QUADRATURE_FAILURE"


class UnsolvableFactor(KostantError, ValueError):
    code = "UNSOLVABLE_FACTOR"


class PreconditionViolated(KostantError, ValueError):
    code = "PRECONDITION_VIOLATED"


class NotClosed(KostantError, ValueError):
    code = "NOT_CLOSED"


class DegreeOverflow(KostantError, ValueError):
    code = "DEGREE_OVERFLOW"


class EvaluationFailure(KostantError, RuntimeError):
    code = "EVALUATION_FAILURE"


class ParseError(KostantError, ValueError):
    code = "PARSE_ERROR"


class SchemaError(KostantError, ValueError):
    code = "SCHEMA_ERROR"

    def __init__(self, message="", *, path=()):
        loc = "/".join(str(p) for p in path)
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = tuple(path)


class ModelError(KostantError, ValueError):
    code = "MODEL_ERROR"
