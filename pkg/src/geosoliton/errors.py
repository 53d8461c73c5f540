"""Exception types raised by the toolkit.

Every numerical failure mode has its own class so callers (and the CLI) can
tell a bad configuration apart from a check that genuinely failed.
"""


class GeosolitonError(Exception):
    """Base class for all toolkit errors."""


class GridMismatch(GeosolitonError, ValueError):
    """Two fields (or a field and a grid) do not share the same sampling."""


class NonSolvableConstraint(GeosolitonError):
    """An auxiliary-field constraint has no periodic solution.

    Raised when the right-hand side carries a mean (or other null-space)
    component that the inverted operator annihilates.
    """


class NullModeConflict(GeosolitonError):
    """The right-hand side has energy on a characteristic (null) mode of a
    hyperbolic constraint operator."""


class ProjectionLoss(GeosolitonError):
    """A zero-mean antiderivative discarded more than the allowed mean."""

    def __init__(self, message, discarded=None):
        super().__init__(message)
        self.discarded = discarded


class NoConvergence(GeosolitonError):
    def __init__(self, iterations, last_delta):
        super().__init__(
            f"fixed-point iteration did not converge after {iterations} "
            f"iterations (last change {last_delta:.3e})"
        )
        self.iterations = iterations
        self.last_delta = last_delta


class ImaginaryLeak(GeosolitonError):
    """A quantity that must be real picked up an imaginary part."""


class UnsupportedSignature(GeosolitonError):
    """The operation is only defined for the Euclidean signature E = +1."""


class NonTangentInput(GeosolitonError):
    """A spin derivative has a component along the spin itself."""


class NonUnit(GeosolitonError):
    """A spin field violates its normalisation S.S = E."""


class S3NotZero(GeosolitonError):
    """A two-component spin model received a nonzero third component."""


class ZeroGaugeParam(GeosolitonError, ValueError):
    """The gauge parameter b must be nonzero."""


class NonPeriodicPhase(GeosolitonError):
    """A phase factor is not periodic on the grid.

    The factored representation is attached so callers can still use it.
    """

    def __init__(self, message, periodic_part=None, linear_phase=None):
        super().__init__(message)
        self.periodic_part = periodic_part
        self.linear_phase = linear_phase


class DegenerateSupport(GeosolitonError):
    """Too little of the domain lies away from a coordinate singularity."""


class DegenerateImmersion(GeosolitonError):
    """r_x ^ r_y vanishes somewhere on the patch."""


class SingularMetric(GeosolitonError):
    """The first fundamental form is not invertible."""


class GaugeViolation(GeosolitonError):
    """Arc-length / orthogonality preconditions of the trihedral fail."""

    def __init__(self, message, e_deviation=None, f_deviation=None):
        super().__init__(message)
        self.e_deviation = e_deviation
        self.f_deviation = f_deviation


class BlowupDetected(GeosolitonError):
    def __init__(self, time, growth):
        super().__init__(f"solution blew up at t={time:.6g} (growth factor {growth:.3g})")
        self.time = time
        self.growth = growth


class InsufficientSnapshots(GeosolitonError):
    """A trajectory is too short for centred time differencing."""
