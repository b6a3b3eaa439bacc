"""Exception types raised by mgwave."""


class MgwaveError(Exception):
    """Base class for all mgwave errors."""


class InvalidArgumentError(MgwaveError, ValueError):
    """An argument is out of the documented domain (bad count, spacing, ...)."""


class IncompatibleGridError(MgwaveError, ValueError):
    """Two states or grids that must match (counts, spacings, centers) do not."""


class DegenerateStateError(MgwaveError, ValueError):
    """An expectation value was requested for a state with zero norm."""


class ModelDomainError(MgwaveError, ValueError):
    """The potential evaluated to a non-finite value on the grid."""


class ModelDefinitionError(MgwaveError, ValueError):
    """A model was constructed with inconsistent data (non-SPD mass, bad gradient)."""


class UnsupportedModelError(MgwaveError, ValueError):
    """The model lacks data required by the requested operation."""


class UnsupportedSchemeError(MgwaveError, ValueError):
    """Unknown composition scheme name/order pair."""


class ConfigError(MgwaveError, ValueError):
    """An experiment configuration file failed to parse or validate."""


class TruncationWarning(UserWarning):
    """The wavepacket has non-negligible amplitude at the grid boundary."""
