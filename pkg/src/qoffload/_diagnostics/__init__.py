from .gradcheck import (
    GradcheckReport,
    GradInstance,
    analytic_gradient,
    finite_diff_check,
    gradcheck,
    numeric_gradient,
    random_instance,
)
from .oracle import (
    OracleCompareReport,
    OracleSeedResult,
    learner_evaluator,
    oracle_compare,
    train_tiny_learner,
)
from .special import Prop1Report, exp_integral_e1, prop1_bound, prop1_monitor
from .tiny_mdp import (
    OracleSolution,
    TinyInstance,
    bellman_residual,
    build_tiny_instance,
    evaluate_policy,
    greedy_policy,
    power_rollout_cost,
    rollout_cost,
    table_evaluator,
    tiny_config,
    value_iteration_oracle,
)

__all__ = [
    "GradInstance",
    "GradcheckReport",
    "OracleCompareReport",
    "OracleSeedResult",
    "OracleSolution",
    "Prop1Report",
    "TinyInstance",
    "analytic_gradient",
    "bellman_residual",
    "build_tiny_instance",
    "evaluate_policy",
    "exp_integral_e1",
    "finite_diff_check",
    "gradcheck",
    "greedy_policy",
    "learner_evaluator",
    "numeric_gradient",
    "oracle_compare",
    "power_rollout_cost",
    "prop1_bound",
    "prop1_monitor",
    "random_instance",
    "rollout_cost",
    "table_evaluator",
    "tiny_config",
    "train_tiny_learner",
    "value_iteration_oracle",
]
