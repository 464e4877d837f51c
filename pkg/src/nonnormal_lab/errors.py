"""Exception hierarchy shared by all modules."""


class NonnormalLabError(Exception):
    """Base class for every error raised by this package."""


class InvalidMatrix(NonnormalLabError):
    """Matrix contains NaN/Inf entries or is otherwise malformed."""


class ShapeError(NonnormalLabError):
    """Operands have incompatible or non-square shapes."""


class NearDefective(NonnormalLabError):
    """Eigenvector matrix is numerically singular; kappa(V) is unreliable.

    Carries the smallest singular value of the eigenvector matrix.
    """

    def __init__(self, message, sigma_min=None):
        super().__init__(message)
        self.sigma_min = sigma_min


class NotSchurStable(NonnormalLabError):
    """Spectral radius >= 1 where a Schur-stable matrix is required."""


class InvalidCovariance(NonnormalLabError):
    """Covariance matrix is asymmetric or not positive semidefinite."""


class EmptyHorizon(NonnormalLabError):
    """A signal operation was asked to produce or consume zero samples."""


class InvalidBeta(NonnormalLabError):
    """Suppressor update rate outside the admissible interval (0, 1]."""


class InsufficientSamples(NonnormalLabError):
    """Too few samples for the requested statistic."""


class DegenerateGrid(NonnormalLabError):
    """A correlation was requested over a constant or single-point grid."""


class AmplifierControlViolated(NonnormalLabError):
    """A held-constant control of an intervention experiment drifted."""


class DivergedRollout(NonnormalLabError):
    """More than the tolerated fraction of rollouts left the valid region."""

    def __init__(self, message, diverged=0, total=0):
        super().__init__(message)
        self.diverged = diverged
        self.total = total


class ControllerDesignFailed(NonnormalLabError):
    """Riccati iteration did not converge or the gain does not stabilize."""


class ScenarioInvalid(NonnormalLabError):
    """Scenario parameters produce an unstable or ill-posed closed loop."""


class ScenarioRunFailed(NonnormalLabError):
    """A bridge-scenario run could not produce trustworthy metrics."""


class ConfigError(NonnormalLabError):
    """Experiment configuration is unreadable or inconsistent."""
