"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`DbcsError`.
Input problems (bad logs, bad configs, out-of-domain arguments) additionally
derive from :class:`ValueError` so callers can treat them uniformly.
"""


class DbcsError(Exception):
    """Base class for all package errors."""


# --- log / data model -------------------------------------------------------

class LogError(DbcsError, ValueError):
    """A log row or file violates the data model."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PropensityViolation(LogError):
    """A propensity is outside (0, 1), below the declared floor, or the vector does not sum to one."""


class RewardBoundViolation(LogError):
    """A reward exceeds the declared bound M in absolute value."""


class OrderViolation(LogError):
    """Round indices are not consecutive starting at 1."""


class ParseError(LogError):
    """A line of a log file is not valid JSON."""


class SchemaError(LogError):
    """A record is missing a required field or a field has the wrong type."""

    def __init__(self, field, line=None, detail=None):
        self.field = field
        msg = f"missing or invalid field {field!r}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg, line=line)


class DimensionMismatch(LogError):
    """Vector dimensions disagree with the log (arm count, context width)."""


# --- estimators ---------------------------------------------------------------

class EmptyState(DbcsError, ValueError):
    """A statistic was requested before any round was seen."""


class OutOfRange(DbcsError, IndexError):
    """A round index beyond the generated horizon was requested."""


# --- confidence -----------------------------------------------------------------

class DomainError(DbcsError, ValueError):
    """An argument lies outside the mathematical domain of the function."""


class MissingBound(DbcsError, ValueError):
    """An exact confidence sequence was requested without m = M / p_min."""


class BracketError(DbcsError, ArithmeticError):
    """The closed-form exact interval does not bracket the mixture root."""


class NonConvergence(DbcsError, ArithmeticError):
    """A series or iteration hit its term cap."""


# --- configuration --------------------------------------------------------------

class ConfigError(DbcsError, ValueError):
    """A run configuration is invalid; ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
