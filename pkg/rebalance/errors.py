from __future__ import annotations

from typing import Optional


class RebalanceError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(RebalanceError):
    pass


class InputError(RebalanceError, ValueError):
    pass


class InsufficientMinorityError(InputError):
    def __init__(self, w: int, needed: int = 2):
        super().__init__(f"need at least {needed} minority rows, got {w}")
        self.w = w
        self.needed = needed

    def __reduce__(self):
        return (type(self), (self.w, self.needed))


class DivergenceError(RebalanceError):
    """Training produced a non-finite loss or parameter.

    `step` is the epoch (regression training) or the outer iteration
    (adversarial training) at which it was detected.
    """

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step
        self._message = message

    def __reduce__(self):
        return (type(self), (self._message, self.step))


class StratificationError(RebalanceError):
    pass


class LoadError(RebalanceError):
    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        where = ""
        if row is not None or column is not None:
            where = f" [row={row}, column={column}]"
        super().__init__(message + where)
        self.row = row
        self.column = column
        self._message = message

    def __reduce__(self):
        return (type(self), (self._message, self.row, self.column))


class UndefinedMetricError(RebalanceError):
    pass


class LeakageError(RebalanceError):
    pass


class BenchmarkError(RebalanceError):
    """A fold job failed; names the cell of the grid that failed."""

    def __init__(self, dataset: str, repeat: int, fold: int, method: str, cause: BaseException):
        super().__init__(
            f"{type(cause).__name__} in dataset={dataset} repeat={repeat} "
            f"fold={fold} method={method}: {cause}"
        )
        self.dataset = dataset
        self.repeat = repeat
        self.fold = fold
        self.method = method
        self.cause = cause

    def __reduce__(self):
        return (type(self), (self.dataset, self.repeat, self.fold, self.method, self.cause))

    def record(self) -> dict:
        return {
            "dataset": self.dataset,
            "repeat": self.repeat,
            "fold": self.fold,
            "method": self.method,
            "error_type": type(self.cause).__name__,
            "message": str(self.cause),
        }
