from .gradients import grad_eta, grad_rate, grad_rates, server_reward, td_error_ser
from .learner import (
    ServerLearner,
    ServerUpdate,
    algorithm2_block,
    gd_step_ser,
    server_feature_scales,
)

__all__ = [
    "ServerLearner",
    "ServerUpdate",
    "algorithm2_block",
    "gd_step_ser",
    "grad_eta",
    "grad_rate",
    "grad_rates",
    "server_feature_scales",
    "server_reward",
    "td_error_ser",
]
