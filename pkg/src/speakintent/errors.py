"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so new error types should
subclass one of the four categories below rather than Exception.
"""


class SpeakIntentError(Exception):
    """Base class for all package errors."""


class ConfigError(SpeakIntentError):
    """Invalid configuration value or config file. CLI exit code 2."""


class DataFormatError(SpeakIntentError):
    """Malformed or inconsistent input data. CLI exit code 3."""


class SamplingError(SpeakIntentError):
    """Negative-window placement is infeasible. CLI exit code 4."""


class NumericalError(SpeakIntentError):
    """A numerical routine failed to converge or produced garbage. CLI exit code 5."""
