"""Exception types shared across the engine."""


class IndecompError(Exception):
    """Base class; carries a machine-readable code for the CLI."""

    code = "error"


class DTooSmall(IndecompError):
    code = "DTooSmall"


class NotSquareFree(IndecompError):
    code = "NotSquareFree"


class MixedFields(IndecompError):
    code = "MixedFields"


class DivisionByZero(IndecompError):
    code = "DivisionByZero"


class NotIntegral(IndecompError):
    code = "NotIntegral"


class NotTotallyPositive(IndecompError):
    code = "NotTotallyPositive"


class NotDefinite(IndecompError):
    code = "NotDefinite"


class NotClassical(IndecompError):
    code = "NotClassical"


class ModeMismatch(IndecompError):
    code = "ModeMismatch"


class NotCodifferent(IndecompError):
    code = "NotCodifferent"


class NotOdd(IndecompError):
    code = "NotOdd"


class CountTooSmall(IndecompError):
    code = "CountTooSmall"


class BudgetExceeded(IndecompError):
    code = "BudgetExceeded"


class MissingCensus(IndecompError):
    code = "MissingCensus"


class PartialClassification(IndecompError):
    code = "PartialClassification"


class ParseError(IndecompError):
    code = "ParseError"


class InternalInvariantError(IndecompError):
    """A post-hoc soundness re-check failed; results must not be trusted."""

    code = "InternalInvariantError"
