"""Exception types shared across the package."""


class FuselabError(Exception):
    """Base class for all errors raised by this package."""


class BundleError(FuselabError):
    """A feature bundle on disk or in memory violates the interchange contract."""


class ConfigError(FuselabError):
    """An experiment or classifier configuration is invalid."""


class ConvergenceError(FuselabError):
    """An iterative solver terminated without meeting its optimality test."""
