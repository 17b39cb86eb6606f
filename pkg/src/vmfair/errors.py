"""Exception types carrying machine-readable codes."""

from __future__ import annotations


class VmfairError(ValueError):
    """Base error: ``code`` is stable and machine-readable, ``str(err)`` is for humans."""

    def __init__(self, code: str, message: str, *, row: int | None = None, column: str | None = None):
        self.code = code
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        loc = f" ({', '.join(where)})" if where else ""
        super().__init__(f"[{code}] {message}{loc}")
        self.message = message

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "row": self.row, "column": self.column}


class InputError(VmfairError):
    """Malformed data: bad CSV, non-binary values, mismatched stream lengths."""


class ConfigError(VmfairError):
    """A configuration that cannot be run against the given input."""
