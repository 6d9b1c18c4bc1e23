"""Exception hierarchy. Every error carries the CLI exit code it maps to."""

from __future__ import annotations


class PgrecError(Exception):
    exit_code = 1


class UsageError(PgrecError):
    """Bad flags, unknown config keys, incompatible option combinations."""

    exit_code = 1


class DataError(PgrecError):
    exit_code = 2


class DataFormatError(DataError):
    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class DanglingReferenceError(DataError):
    def __init__(self, kind: str, original_id, path=None):
        self.kind = kind
        self.original_id = original_id
        suffix = f" (referenced in {path})" if path is not None else ""
        super().__init__(f"unknown {kind} id {original_id}{suffix}")


class DuplicateInteractionError(DataFormatError):
    pass


class InsufficientNegativesError(DataError):
    def __init__(self, row: int, eligible: int, wanted: int):
        self.row = row
        super().__init__(
            f"row {row} has {eligible} eligible negative items, {wanted} required"
        )


class InfeasibleConfigError(DataError):
    pass


class CheckpointMismatchError(DataError):
    pass


class InsufficientSamplesError(DataError):
    pass


class NumericError(PgrecError):
    exit_code = 3


class NonFiniteError(NumericError):
    pass


class DivergenceError(NumericError):
    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f"non-finite loss {loss} at epoch {epoch}, batch {batch}")


class GradCheckFailed(NumericError):
    pass
