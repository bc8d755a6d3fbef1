from enum import Enum, IntEnum, unique


@unique
class PolicyKind(str, Enum):
    """Offloading policy run by every wireless device.

    `PROPOSED` is the decentralized parametric Q-learner; the other three are
    the comparison schemes.
    """

    PROPOSED = "proposed"
    BINARY = "binary"
    EVEN = "even"
    RANDOM = "random"


@unique
class QueueMode(str, Enum):
    """Accounting of the offloaded residual in the WD queue.

    `RETAINING` only subtracts the locally executed cycles, so the
    residual handed to the server also stays in the WD queue. `CONSERVING`
    removes it.
    """

    RETAINING = "retaining"
    CONSERVING = "conserving"


@unique
class ServerMode(str, Enum):
    """How the edge server picks its CPU rates."""

    LEARNING = "learning"
    FIXED = "fixed"


@unique
class SweepAxis(str, Enum):
    ARRIVAL_PROB = "b"
    NUM_WDS = "K"


@unique
class GradTarget(str, Enum):
    """Analytic gradients checked by the finite-difference oracle."""

    GRAD_POWER = "grad_power"
    GRAD_THETA = "grad_theta"
    GRAD_RATE = "grad_rate"
    GRAD_ETA = "grad_eta"


@unique
class RunStatus(str, Enum):
    COMPLETED = "completed"
    DIVERGED = "diverged"


@unique
class ExitCode(IntEnum):
    """Process exit codes of the `qoffload` command."""

    SUCCESS = 0
    USAGE_ERROR = 1
    VERIFICATION_FAILURE = 2
    LEARNER_DIVERGENCE = 3
