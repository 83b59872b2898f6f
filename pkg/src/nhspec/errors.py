"""Exception types raised across the package."""


class NHSpecError(Exception):
    """Base class for all package errors."""


class InvalidInputError(NHSpecError, ValueError):
    pass


class NumericRangeError(NHSpecError, ArithmeticError):
    pass


class InvalidStepError(NHSpecError, ValueError):
    """Integration step violates the stability bound."""


class IntegratorFailureError(NHSpecError, RuntimeError):
    """Trace drifted beyond tolerance during master-equation integration."""


class ConsistencyError(NHSpecError, RuntimeError):
    """Internal quantity left its physically allowed range."""


class UncertaintyUnavailableError(NHSpecError, RuntimeError):
    pass


class TopologyError(NHSpecError, RuntimeError):
    """Base class for band tracking and invariant failures."""


class GridRefinementRequired(TopologyError):
    """Band tracking is ambiguous between two grid points."""

    def __init__(self, message, k_interval):
        super().__init__(f"{message} (k in [{k_interval[0]:.6g}, {k_interval[1]:.6g}])")
        self.k_interval = tuple(k_interval)


class BasePointError(TopologyError):
    pass


class ResolutionError(TopologyError):
    pass


class DegenerateBandsError(TopologyError):
    pass


class ConfigError(NHSpecError, ValueError):
    pass
