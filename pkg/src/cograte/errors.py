"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(ArithmeticError):
    """An iterative routine did not converge within its iteration budget."""


class ConfigError(ValueError):
    """A configuration file is malformed or inconsistent."""
