"""Exception taxonomy shared across the package.

Every failure mode that callers are expected to handle gets its own class so
that experiment drivers can map them onto exit codes without string matching.
"""


class UALabError(Exception):
    """Base class for all package errors."""


class NonConvergence(UALabError):
    """A dense linear algebra backend failed to converge."""


class NotUnitary(UALabError):
    """A matrix required to be unitary failed the unitarity tolerance."""


class DegenerateNormalization(UALabError):
    """A left/right eigenvector pair has near-zero overlap (near-defective matrix)."""


class NearSingular(UALabError):
    """A resolvent evaluation point is too close to the spectrum."""


class DegenerateOmega(UALabError):
    """The scaled overlap omega_1 vanishes, so the outlier location is undefined."""


class CollisionSingularity(UALabError):
    """Two eigenvalue trajectories approached within the collision tolerance."""


class TimeSingularity(UALabError):
    """The time prefactor t(t^2 - 1) underflowed during field evaluation."""


class StepCollapse(UALabError):
    """The adaptive integrator's step size underflowed."""


class SingularInput(UALabError):
    """An operation received an input that is singular for that operation."""


class Divergence(UALabError):
    """A series evaluation was requested outside its domain of convergence."""


class MatchingAmbiguous(UALabError, UserWarning):
    """Two continuation assignments differ in cost by less than the tolerance.

    Issued via warnings.warn and recorded on the trajectory bundle; tracking
    continues with the optimal assignment (ties broken by lowest index).
    """


class ConfigInvalid(UALabError):
    """Experiment configuration failed validation.

    Carries a list of (field, message) pairs so the CLI can print one line
    per offending field.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"{field}: {msg}" for field, msg in self.problems)
        super().__init__(lines or "invalid configuration")


class IoError(UALabError):
    """A file could not be written or read."""


class SchemaMismatch(UALabError):
    """Records do not conform to the named table schema."""
