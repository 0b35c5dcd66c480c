"""Exception hierarchy shared by all services."""
from typing import Optional


class ExplorerError(Exception):
    """Base class for every error raised by the explorer package."""


class NonPositiveDuration(ExplorerError, ValueError):
    pass


class NonFiniteInput(ExplorerError, ValueError):
    pass


class TimeOutOfRange(ExplorerError, ValueError):
    pass


class InvalidDerivativeOrder(ExplorerError, ValueError):
    pass


class InvalidParams(ExplorerError, ValueError):
    pass


class IndexOutOfRange(ExplorerError, IndexError):
    pass


class OriginOutOfBounds(ExplorerError, ValueError):
    pass


class NonUnitDirection(ExplorerError, ValueError):
    pass


class DegenerateThrust(ExplorerError, ValueError):
    """Commanded thrust vector vanishes (free fall requested)."""


class DegenerateHeading(ExplorerError, ValueError):
    """Desired thrust axis is parallel to the heading vector."""


class InvalidTimestep(ExplorerError, ValueError):
    pass


class InvalidControlRate(ExplorerError, ValueError):
    pass


class SolverFailure(ExplorerError, RuntimeError):
    """The boundary-value system could not be solved. Always a bug."""


class WorldParseError(ExplorerError, ValueError):
    """Malformed world document."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class WorldSemanticError(ExplorerError, ValueError):
    """Well-formed world document describing impossible geometry."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class ConfigError(ExplorerError, ValueError):
    """Invalid run configuration document."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
