class QoffloadError(Exception):
    """Base class for errors raised by qoffload."""


class ConfigurationError(QoffloadError, ValueError):
    """A configuration document or argument violates the model's invariants."""


class InfeasibleOffloadError(QoffloadError, ValueError):
    """The transmit power needed for an intermediate output is not a finite float.

    This signals a ζ / W misconfiguration: the power needed to send a residual
    doubles with every extra bit per hertz pushed through one offload slot.
    """


class LearnerDivergenceError(QoffloadError, RuntimeError):
    """A learner produced a non-finite gradient or parameter.

    Attributes:
        learner: Identifier of the learner ("wd3", "server").
        block: Block index at which the divergence was detected.
    """

    def __init__(self, learner: str, block: int, detail: str = "") -> None:
        self.learner = learner
        self.block = block
        message = f"learner {learner} diverged at block {block}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class OracleConvergenceError(QoffloadError, RuntimeError):
    """Value iteration did not reach the sup-norm tolerance."""


class VerificationError(QoffloadError, AssertionError):
    """A diagnostic check failed its threshold."""
