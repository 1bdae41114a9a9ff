"""Exception types shared across the package."""


class PmdlabError(Exception):
    """Base class for all package-specific errors."""


class InvalidDistributionError(PmdlabError):
    """An action distribution violates the simplex preconditions."""


class ConfigurationError(PmdlabError):
    """A config object or spec file is invalid or inconsistent."""


class NumericalError(PmdlabError):
    """A loss or gradient became non-finite."""


class IncompleteDataError(PmdlabError):
    """A report or aggregate was requested over missing runs."""


class DuplicateRunError(PmdlabError):
    """A (config, env, seed) row was inserted twice into a result store."""


class EnvUsageError(PmdlabError):
    """An environment was driven incorrectly (e.g. stepping a finished episode)."""
