"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to the documented process status without inspecting messages.
"""


class ImplosionError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ValidationError(ImplosionError):
    """Inputs violate a documented precondition."""

    exit_code = 2


class OutOfRange(ValidationError):
    """(gamma, r) lies outside the admissible parameter window."""


class NegativeRadicand(ValidationError):
    """A closed-form square root has a negative argument."""


class ZeroAmplitude(ValidationError):
    """Near-origin amplitude w0 is zero."""


class UnsupportedOrder(ValidationError):
    """Requested derivative order is not supported."""


class ZeroVector(ValidationError):
    """A probe vector has zero norm."""


class TimeBeyondBlowup(ValidationError):
    """Physical time is at or past the blow-up time."""


class ProfileTooShort(ValidationError):
    """Profile tables do not cover the requested radial window."""


class GridTooCoarse(ValidationError):
    """Too few samples to resolve a required feature."""


class NumericalError(ImplosionError):
    """A numerical procedure failed."""

    exit_code = 3


class DegenerateOrder(NumericalError):
    """Taylor recursion hit a resonant (singular) order."""


class DenominatorVanished(NumericalError):
    """D_W or D_Z crossed zero away from the sonic point."""


class SeedRejected(NumericalError):
    """Inner trajectory does not enter the sonic point along the seed."""


class ToleranceNotMet(NumericalError):
    """Adaptive step control failed."""


class NoConvergence(NumericalError):
    """Eigen-solver did not converge."""


class CflViolation(NumericalError):
    """Time step exceeded the transport stability bound."""


class VacuumEncountered(NumericalError):
    """Sound speed dropped to or below the configured floor."""
