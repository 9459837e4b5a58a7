"""Exception hierarchy shared across the package."""

from __future__ import annotations


class StructBenchError(Exception):
    """Base class for every error raised by structbench."""


class GraphError(StructBenchError, ValueError):
    """Malformed graph: cycles, self-loops, dangling edge endpoints."""


class UnknownVariableError(StructBenchError, KeyError):
    def __init__(self, name: str, where: str = "graph") -> None:
        super().__init__(f"unknown variable {name!r} in {where}")
        self.name = name

    def __str__(self) -> str:
        return self.args[0]


class ParseError(StructBenchError, ValueError):
    """Syntax error in a BIF document, with 1-based line/column and 0-based offset."""

    def __init__(self, message: str, line: int = 1, column: int = 1, offset: int = 0) -> None:
        super().__init__(f"{message} (line {line}, column {column}, position {offset})")
        self.line = line
        self.column = column
        self.offset = offset


class ValidationError(StructBenchError, ValueError):
    """A document or value parsed fine but breaks a model invariant."""

    def __init__(self, message: str, path: str | None = None) -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class SchemaError(StructBenchError, ValueError):
    """Tabular data does not match its declared schema."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None) -> None:
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


class ConfigError(StructBenchError, ValueError):
    """Invalid benchmark configuration."""
