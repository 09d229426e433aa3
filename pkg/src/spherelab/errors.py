"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2,
NumericalInvariantError -> 3, BudgetExceededError -> 4.
"""


class SphereLabError(Exception):
    """Base class for package-specific failures."""


class ConfigError(SphereLabError):
    """Invalid experiment configuration; message names the offending field."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        loc = ""
        if field is not None:
            loc += f" [field: {field}]"
        if line is not None:
            loc += f" [line {line}]"
        super().__init__(message + loc)


class NumericalInvariantError(SphereLabError):
    """A numerical self-check failed (quadrature exactness, finiteness...)."""


class BudgetExceededError(SphereLabError):
    """A node/degree/iteration budget would be exceeded."""


class InfeasibleQuadratureError(BudgetExceededError):
    """Requested quadrature rule is too large for the node budget."""
