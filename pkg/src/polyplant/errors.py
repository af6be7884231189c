"""Exception types raised across the package.

All configuration and input problems derive from ValueError so that callers
who do not care about the fine-grained type can catch one base class; the
simulation engine raises NumericalDivergenceError (a RuntimeError) when the
state leaves the finite or solvable region.
"""


class InvalidInputError(ValueError):
    """An argument is outside its physical or structural domain."""


class InvalidSampleError(InvalidInputError):
    """A fitting sample cannot be used, e.g. zero output with relative weighting."""


class DegenerateFitError(ValueError):
    """The regression design does not determine all coefficients."""


class InsufficientTankTemperatureError(ValueError):
    """Tank water at the tap cannot serve the requested load."""


class ConfigurationError(ValueError):
    """Plant or scenario configuration is missing, malformed or inconsistent."""


class AlignmentError(ValueError):
    """Measured and simulated series have no overlapping time span."""


class DegenerateSeriesError(ValueError):
    """A comparison metric is undefined for this series (constant data)."""


class NumericalDivergenceError(RuntimeError):
    """Simulation produced non-finite values or an unsolvable coupling loop."""
