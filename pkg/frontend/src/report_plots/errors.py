"""Error types raised while validating or rendering simulator outputs."""


class SchemaError(Exception):
    """Input file does not match a frozen schema; message names the drift."""


class EmptyInput(Exception):
    """Schema-valid input carries no data rows to plot."""
