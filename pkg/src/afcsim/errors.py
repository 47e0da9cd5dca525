"""Exception types shared across the package."""


class ConfigError(Exception):
    """Bad or missing configuration value. CLI maps this to exit code 2."""


class NumericsError(RuntimeError):
    """An internal numerical invariant was violated. CLI exit code 3."""


class NotACombError(RuntimeError):
    """Spectrum does not contain enough teeth to analyze. CLI exit code 4."""


class NoEchoError(RuntimeError):
    """No echo above the noise floor where one was required. CLI exit code 4."""
