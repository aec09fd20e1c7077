"""
Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI maps it to: usage errors
exit with 2, numerical failures with 3 and validation breaches with 4.
"""


class FermiChainError(Exception):
    """Base class for all library errors."""

    exit_code: int = 1


# #################
# Usage errors
# #################


class UsageError(FermiChainError, ValueError):
    """Invalid input supplied by the caller."""

    exit_code = 2


class InvalidSizeError(UsageError):
    """Chain length outside the supported range."""


class InvalidRangeError(UsageError):
    """Disorder range with a non-positive or inverted bound."""


class UnsupportedSizeError(UsageError):
    """Operation requires an even chain length."""


class InvalidInputError(UsageError):
    """Matrix input violates a required symmetry."""


class InvalidDimensionError(UsageError):
    """Matrix dimension is not allowed for the operation."""


class InvalidScheduleError(UsageError):
    """Schedule is not evaluable or not periodic as required."""


class EmptyBlockError(UsageError):
    """Entanglement block with no sites."""


class SizeLimitError(UsageError):
    """Chain too long for exact diagonalization."""


# #################
# Numerical failures
# #################


class NumericalError(FermiChainError, ArithmeticError):
    """A computation could not produce a trustworthy result."""

    exit_code = 3


class DegeneratePointError(NumericalError):
    """Bogoliubov amplitudes requested at a gapless momentum."""


class UndefinedIndexError(NumericalError):
    """Winding index requested at the critical field."""


class DegenerateEllipseError(NumericalError):
    """Winding index requested with zero anisotropy."""


class KernelParityError(NumericalError):
    """Numerical kernel of the BdG matrix has an inconsistent structure."""


class OrthogonalVacuumError(NumericalError):
    """Vacuum has no Thouless form relative to the reference vacuum."""


class StepSizeError(NumericalError):
    """Canonical-relation drift exceeded the limit during propagation."""


class InconsistentGreenError(NumericalError):
    """Green functions do not yield a real Majorana correlation matrix."""


class ParticleHoleViolationError(NumericalError):
    """Monodromy eigenphases are not paired by particle-hole symmetry."""


class NonEquilibriumUnsupportedError(NumericalError):
    """String correlator requested for complex (non-equilibrium) data."""


class NoBoundStateError(NumericalError):
    """No eigenvalue found outside the continuum."""


# #################
# Validation
# #################


class ValidationBreachError(FermiChainError):
    """One or more validation checks exceeded their thresholds."""

    exit_code = 4
