"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so raising the right class
matters more than the message text.
"""


class WeathershiftError(Exception):
    """Base class for all package-level errors."""


class ConfigError(WeathershiftError):
    """A config file, preset, or job description is malformed or inconsistent."""


class DataError(WeathershiftError):
    """A dataset, manifest, annotation file, or prediction file is invalid."""


class AnalysisError(WeathershiftError):
    """A downstream computation was asked for data that is missing or unusable."""
