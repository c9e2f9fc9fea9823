"""Exception hierarchy shared by all stages."""

from __future__ import annotations


class SndGazeError(Exception):
    """Base class for every error raised by this package."""


class LexError(SndGazeError):
    """Malformed source text (unterminated string, char or comment)."""

    def __init__(self, message: str, file: str, line: int, column: int):
        super().__init__(f"{file}:{line}:{column}: {message}")
        self.file = file
        self.line = line
        self.column = column


class EmptyCorpusError(SndGazeError):
    pass


class EmbeddingError(SndGazeError):
    pass


class DimensionMismatchError(EmbeddingError):
    pass


class NonFiniteVectorError(EmbeddingError):
    pass


class DuplicateWordError(EmbeddingError):
    pass


class MissingTableError(EmbeddingError, FileNotFoundError):
    pass


class ZeroVectorError(EmbeddingError):
    """Cosine similarity is undefined for a zero vector."""


class NotEmbeddedError(EmbeddingError, KeyError):
    pass


class InsufficientCoverageError(SndGazeError):
    """Fewer than two vocabulary words have embeddings."""


class GazeIngestError(SndGazeError):
    def __init__(self, message: str, row: int | None = None):
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}{message}")
        self.row = row


class DegenerateSplitError(SndGazeError):
    pass


class StatsError(SndGazeError):
    pass


class SingleClassError(SndGazeError):
    pass


class PipelineError(SndGazeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
