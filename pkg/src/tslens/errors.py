"""Exception hierarchy shared across the package.

Two broad families: ``InvalidInput`` for precondition violations the caller
can fix (maps to HTTP 422 in the service layer), ``DataError`` for corrupt
or missing stored data, and plain ``TsLensError`` for everything else.
"""


class TsLensError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(TsLensError):
    """A caller-supplied value violates an operation's precondition."""


class DataError(TsLensError):
    """Stored or transmitted data is missing, malformed, or corrupt."""


class NaNInput(InvalidInput):
    """A numeric input contains NaN (or infinity) where finite values are required."""


class DegenerateInput(InvalidInput):
    """The input has too little structure for the operation (e.g. under 2 rows)."""
