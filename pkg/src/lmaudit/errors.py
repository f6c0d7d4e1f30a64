"""Error taxonomy shared across the package.

Three categories matter to callers (and map to CLI exit codes): problems
with the configuration, problems with the input data, and numeric failures
raised while fitting or transforming.
"""


class AuditError(ValueError):
    """Base class for all package-specific errors."""


class ConfigError(AuditError):
    """The configuration document is malformed or internally inconsistent."""

    exit_code = 2


class DataError(AuditError):
    """The input data violates the declared schema or a value constraint."""

    exit_code = 3


class NumericError(AuditError):
    """A numeric routine hit a domain violation or failed to converge."""

    exit_code = 4
