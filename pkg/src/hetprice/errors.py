"""Exception hierarchy shared by every module."""

from __future__ import annotations


class HetPriceError(Exception):
    """Base class for all library errors."""


class SchemaError(HetPriceError):
    """Input document has the wrong shape."""


class DomainError(HetPriceError):
    """A value violates a data-model invariant.

    ``where`` carries the offending indices (0-based) when known.
    """

    def __init__(self, message: str, where: tuple | None = None):
        super().__init__(message if where is None else f"{message} at {where}")
        self.where = where


class NonPositivePrice(DomainError):
    pass


class NoBracket(HetPriceError):
    """Residual price equation has no positive solution under the declared regularity."""


class AggregatorError(HetPriceError):
    """Aggregator configuration rejected (bad regularity, failed sampling audit)."""


class EvaluatorDomainError(HetPriceError):
    """A price system could not be evaluated at some bundle."""


class PreconditionError(HetPriceError):
    """A construction's hypothesis does not hold for the given data.

    When the failure is a revealed-preference violation, ``consumer`` and
    ``witness`` identify it.
    """

    def __init__(self, message: str, consumer: int | None = None, witness: list[int] | None = None):
        super().__init__(message)
        self.consumer = consumer
        self.witness = witness


class GarpViolation(HetPriceError):
    def __init__(self, witness: list[int]):
        super().__init__(f"data violate GARP; witness cycle {witness}")
        self.witness = witness


class ConstructionFailed(HetPriceError):
    """Retries exhausted without passing the audit. Indicates a bug, not a data property."""


class RegularityError(HetPriceError):
    """Threshold search failed: the declared regularity case does not fit the expenditure function."""


class SearchBudgetExceeded(HetPriceError):
    """Sorting search hit its node cap before reaching a verdict."""

    def __init__(self, nodes: int):
        super().__init__(f"search budget exceeded after {nodes} nodes; verdict unknown")
        self.nodes = nodes


class NotRumRationalizable(HetPriceError):
    pass


class UnsupportedDimension(HetPriceError):
    pass


class UnsupportedShape(HetPriceError):
    pass
