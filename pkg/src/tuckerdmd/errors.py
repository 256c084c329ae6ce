"""Exception types that map onto the CLI exit-code categories."""


class DataFormatError(ValueError):
    """Malformed file content, bad magic/header, or inconsistent payload."""


class NumericalError(RuntimeError):
    """Numerically degenerate input: zero data, rank deficiency, and the like."""
