"""Exception hierarchy shared by all agmjoin modules."""

from __future__ import annotations


class AgmJoinError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(AgmJoinError):
    """Attribute sets or arities do not line up."""


class QueryFormatError(AgmJoinError):
    """A query text or relation file could not be parsed."""


class MalformedCoverError(AgmJoinError):
    """A weight vector does not match the query's edge list."""


class InfeasibleCoverError(AgmJoinError):
    """A weight vector fails at least one vertex covering constraint."""


class InvalidPartitionError(AgmJoinError):
    """A join strategy proposed an empty or non-proper attribute split."""


class PlanError(AgmJoinError):
    """A pairwise plan tree is malformed or lossy where it must not be."""


class GeneratorParameterError(AgmJoinError):
    """Instance generator called with out-of-range parameters."""


class TimeBudgetExceeded(AgmJoinError):
    """A metered run went past its wall-clock deadline."""
