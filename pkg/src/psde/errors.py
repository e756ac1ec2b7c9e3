"""Exception and warning types shared across the package."""


class PsdeError(Exception):
    """Base class for all package errors."""


class ParameterRejection(PsdeError):
    """A shape-parameter pair lies outside the valid domain.

    ``code`` is one of ``REJECT_ALPHA``, ``REJECT_BETA``, ``REJECT_RHO``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class NoConvergenceError(PsdeError):
    """An iteration exhausted its budget above tolerance.

    Carries the residual (or change) history of the failed run.
    """

    def __init__(self, message: str, history):
        super().__init__(message)
        self.history = list(history)


class CaseInconsistentError(PsdeError):
    """A per-step implicit solve contradicts its own case classification.

    Indicates a NaN/overflow or logic fault, never a modeling outcome.
    """

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class SimulationAborted(PsdeError):
    """Non-finite value produced while generating a path."""


class QuadratureError(PsdeError):
    """A quadrature failed to reach its requested tolerance."""


class SigmaNotPositiveError(PsdeError):
    """sigma sampled non-positive where a positive diffusion is required."""


class BoundVacuousWarning(UserWarning):
    """The H-norm lower bound is vacuous because C(t, alpha, beta, b) >= 1."""


class EpsTooSmallWarning(UserWarning):
    """Finite-difference increment below the roundoff floor of the target."""
