"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration value or combination."""


class DimensionError(ValueError):
    """Array/vector shape or index out of range."""


class ParseError(ValueError):
    """Malformed input file; carries a location when one is known."""

    def __init__(self, message: str, row: int | None = None, column: str | int | None = None):
        loc = ""
        if row is not None:
            loc += f" (row {row}"
            loc += f", column {column})" if column is not None else ")"
        elif column is not None:
            loc += f" (column {column})"
        super().__init__(message + loc)
        self.row = row
        self.column = column


class ScalingError(ValueError):
    """Column cannot be min-max scaled (e.g. constant column)."""
