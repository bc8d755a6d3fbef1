from .gradients import grad_power, grad_theta, td_error_wd, wd_reward
from .learner import (
    WdLearner,
    WdUpdate,
    algorithm1_block,
    gd_step_wd,
    initial_power,
    reference_power,
    wd_feature_scales,
)
from .projection import block_capacity, local_workload, project_action, project_residual

__all__ = [
    "WdLearner",
    "WdUpdate",
    "algorithm1_block",
    "block_capacity",
    "gd_step_wd",
    "grad_power",
    "grad_theta",
    "initial_power",
    "local_workload",
    "project_action",
    "project_residual",
    "reference_power",
    "td_error_wd",
    "wd_feature_scales",
    "wd_reward",
]
