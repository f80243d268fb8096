"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class InterlockError(Exception):
    """Base class for every error raised by this package."""


# ingest
class IngestError(InterlockError):
    pass


class IOFailure(IngestError, OSError):
    pass


class SchemaMismatch(IngestError):
    pass


class DuplicateKey(IngestError):
    def __init__(self, key: str, lines: list[int]):
        self.key = key
        self.lines = lines
        super().__init__(f"duplicate key {key!r} on lines {', '.join(map(str, lines))}")


# graph
class EmptyInput(InterlockError):
    pass


class InvalidPartition(InterlockError):
    pass


# accuracy
class EmptyBoard(InterlockError):
    pass


# metrics
class DisconnectedInput(InterlockError):
    pass


class NoConvergence(InterlockError):
    def __init__(self, message: str, scores=None, iterations: int = 0):
        super().__init__(message)
        self.scores = scores
        self.iterations = iterations


class KeyMismatch(InterlockError):
    pass


class InsufficientData(InterlockError):
    pass


# completeness
class DegenerateFactors(InterlockError):
    pass


class NonPositiveValue(InterlockError, ValueError):
    pass


class InsufficientCountries(InterlockError):
    pass


class SingularFeatures(InterlockError):
    pass


class MissingSelectedIndicator(InterlockError):
    pass


class RankDeficient(InterlockError):
    pass


class NonPositiveMean(InterlockError, ValueError):
    pass


class MissingAggregates(InterlockError):
    pass


# diffusion
class EmptyGraph(InterlockError):
    pass
