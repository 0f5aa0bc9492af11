"""
exceptions.py
Error hierarchy shared by the library and the command line front end.
Every error knows the exit status the CLI reports for it.
"""


class CslBoundsError(Exception):
    """Base class for all cslbounds errors."""

    exit_code = 1


class DomainError(CslBoundsError, ValueError):
    """A physical or numerical input lies outside the domain of an operation."""

    exit_code = 2


class UnsupportedOrderError(DomainError):
    """Requested Bessel order is not implemented (only 0 and 1 are)."""


class UnsupportedKindError(DomainError):
    """Requested diffusion kind does not exist for this geometry."""


class ConfigValidationError(DomainError):
    """A scenario file or override failed validation."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConvergenceError(CslBoundsError):
    """A numerical procedure did not reach its tolerance."""

    exit_code = 3


class OracleConvergenceError(ConvergenceError):
    """Successive refinements of the k-space quadrature disagree."""


class BistabilityError(ConvergenceError):
    """The cavity steady-state iteration did not settle (optical bistability)."""

    def __init__(self, message: str, last_iterates):
        self.last_iterates = tuple(last_iterates)
        super().__init__(f"{message} (last iterates: {self.last_iterates[0]!r}, {self.last_iterates[1]!r})")


class InternalPrecisionError(ConvergenceError):
    """A closed form produced a non-finite intermediate."""


class OutputError(CslBoundsError):
    """Writing results failed, or a result is not serializable (NaN/Inf)."""

    exit_code = 4
