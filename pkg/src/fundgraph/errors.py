"""Exception types shared across the package."""


class FundGraphError(Exception):
    """Base class for all package errors."""


class EmptyInputError(FundGraphError):
    """Input contained no usable records."""


class EmptyGraphError(FundGraphError):
    """An operation required a non-empty graph."""


class ParameterError(FundGraphError):
    """A parameter value is out of its allowed range or infeasible."""


class ContractViolationError(FundGraphError):
    """A call violated a documented precondition."""


class DegreeError(FundGraphError):
    """A node with no neighbors was asked to produce one."""


class StaleCorpusError(FundGraphError):
    """A walk corpus does not match the graph it is being used with."""


class VocabularyError(FundGraphError):
    """A node or fund label is not present in the vocabulary."""


class CorruptFileError(FundGraphError):
    """A persisted artifact failed structural validation on load."""


class DegenerateVectorError(FundGraphError):
    """A zero vector was passed where a direction is required."""


class UndefinedInputError(FundGraphError):
    """The requested statistic is undefined for this input."""


class UndefinedCorrelationError(FundGraphError):
    """Correlation is undefined because one coordinate is constant."""


class WorkspaceLockError(FundGraphError):
    """Another process holds the workspace lock."""
