from .features import (
    FeatureBank,
    features,
    features_kernel,
    q_value,
    q_value_kernel,
    sigmoid,
    sigmoid_kernel,
)
from .td import (
    action_gradient_kernel,
    gradient_norm,
    param_gradient_kernel,
    relative_change_kernel,
    td_error_kernel,
)

__all__ = [
    "FeatureBank",
    "action_gradient_kernel",
    "features",
    "features_kernel",
    "gradient_norm",
    "param_gradient_kernel",
    "q_value",
    "q_value_kernel",
    "relative_change_kernel",
    "sigmoid",
    "sigmoid_kernel",
    "td_error_kernel",
]
