"""Exception hierarchy.

Validation problems (bad parameters, bad config) derive from ``ConfigError``
and map to CLI exit code 2. Numerical failures derive from
``NumericalError`` and map to exit code 3.
"""


class ConfigError(ValueError):
    """A parameter or scenario value violates a documented constraint."""


class DomainError(ConfigError):
    """Input lies outside the regime where a formula is valid."""


class ResolutionError(ConfigError):
    """A grid is too coarse for the feature it must resolve."""


class WindowError(ConfigError):
    """Signal modes fall outside the probe storage window."""


class NumericalError(RuntimeError):
    """A numerical procedure failed."""


class SolverInstabilityError(NumericalError):
    """The time stepper produced non-finite or norm-violating values."""


class FitError(NumericalError):
    """A least-squares fit is degenerate."""


class InversionError(NumericalError):
    """An intensity reading cannot be mapped back to a phase."""


class InfeasibleError(NumericalError):
    """No point of a design search satisfies every condition."""

    def __init__(self, message, binding=None, failures=None):
        super().__init__(message)
        self.binding = binding
        self.failures = dict(failures or {})
