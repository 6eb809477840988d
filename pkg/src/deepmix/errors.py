"""Exception types shared across the package."""


class DeepmixError(Exception):
    """Base class for errors raised by this package."""


class BudgetError(DeepmixError):
    """A requested computation exceeds a configured resource cap."""


class ConfigError(DeepmixError):
    """An experiment configuration is malformed or inconsistent."""


class SolvabilityError(DeepmixError):
    """Inputs fall outside the exactly solvable class of a dedicated solver."""
