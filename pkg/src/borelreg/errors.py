"""Exception hierarchy shared across the package.

Every domain failure derives from :class:`BorelregError` so the CLI can map
them to a single exit code; programming errors (TypeError etc.) are left
alone.
"""


class BorelregError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "error"


class ConfigurationError(BorelregError):
    """Incompatible operands or invalid solver configuration."""

    code = "configuration"


class LatticeError(ConfigurationError):
    """Exponent off the half-integer lattice."""

    code = "lattice"


class UnsupportedScalarError(BorelregError):
    """A scalar operation has no exact representation in the extension."""

    code = "unsupported-scalar"


class TruncationError(BorelregError):
    """A coefficient beyond the truncation order was requested, or an
    operation needs a truncation cap that was not provided."""

    code = "truncation"


class IterationDepthError(BorelregError):
    """Fixed-point iteration exhausted its budget before stabilizing."""

    code = "iteration-depth"


class DivisionError(BorelregError):
    """Reciprocal of a zero series."""

    code = "division"


class DegeneracyError(BorelregError):
    """Singular Pade system that survives maximal denominator reduction."""

    code = "degeneracy"


class DivergenceError(BorelregError):
    """Integrand fails to decay on the integration ray."""

    code = "divergence"


class ContourError(BorelregError):
    """A pole sits on (or too close to) the Laplace integration ray."""

    code = "contour"

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class NoContractionError(BorelregError):
    """Picard iteration is not contracting."""

    code = "no-contraction"


class OutOfRegimeError(BorelregError):
    """Asymptotic evaluation requested outside its validity region."""

    code = "out-of-regime"


class NoConvergenceError(BorelregError):
    """Newton iteration failed to converge."""

    code = "no-convergence"

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory or []


class BranchCollisionError(BorelregError):
    """Newton iterate ran into the branch locus of the algebraic map."""

    code = "branch-collision"


class SamplingError(BorelregError):
    """Samples unsuitable for the requested fit."""

    code = "sampling"


class IndeterminateConstantError(BorelregError):
    """Exponential correction below the noise floor; constant not fittable."""

    code = "indeterminate-constant"


class SingularityProximity(BorelregError):
    """Adaptive integration stalled approaching a singularity.

    Carries the last reliable point and whatever partial data was
    accumulated, so downstream fitting can consume it.
    """

    code = "singularity-proximity"

    def __init__(self, message, last_eta=None, partial=None):
        super().__init__(message)
        self.last_eta = last_eta
        self.partial = partial


class AsymptoticOrderingWarning(UserWarning):
    """Partial sums stopped decreasing; result is outside the reliable
    radius of the expansion."""
