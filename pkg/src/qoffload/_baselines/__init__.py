from .policies import (
    baseline_decide,
    binary_costs,
    binary_offload_decide,
    even_allocation_decide,
    head_of_line,
    local_only,
    random_offload_decide,
)

__all__ = [
    "baseline_decide",
    "binary_costs",
    "binary_offload_decide",
    "even_allocation_decide",
    "head_of_line",
    "local_only",
    "random_offload_decide",
]
