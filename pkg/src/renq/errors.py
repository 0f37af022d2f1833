"""Exception and warning taxonomy shared by all renq modules.

Errors are split by who is at fault: bad caller input (InputError), a model
object that violates its own contract (ModelError), a request outside the
validity regime of an approximation (RegimeError), a well-posed request with
no solution (InfeasibleError), and unparseable configuration (ConfigError).
"""

from __future__ import annotations


class RenqError(Exception):
    """Base class for all renq-specific errors."""


class InputError(RenqError, ValueError):
    """Caller passed an argument outside the operation's documented domain."""


class ModelError(RenqError, ValueError):
    """A physical-model object violates its contract (e.g. non-Hermitian H)."""


class RegimeError(RenqError, ValueError):
    """Requested evaluation outside an approximation's validity regime."""


class InfeasibleError(RenqError, ValueError):
    """The constraint set admits no solution (e.g. pulse area below pi)."""


class ConfigError(RenqError, ValueError):
    """Configuration file could not be parsed.

    Carries the path of the offending key so users can locate the problem.
    """

    def __init__(self, message: str, field_path: str = ""):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)


class RegimeWarning(UserWarning):
    """Soft counterpart of RegimeError: result returned but likely inaccurate."""
