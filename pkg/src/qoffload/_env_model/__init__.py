from .channel import (
    Topology,
    mean_channel_gain,
    noise_power,
    pathloss_db,
    place_wds,
    sample_arrivals,
    sample_channel,
)
from .config import SystemConfig, WdParams
from .costs import StageCosts, server_stage_cost, stage_costs, wd_stage_cost
from .dynamics import (
    achievable_bits,
    executed_server_rates,
    intermediate_output_size,
    local_energy,
    offload_energy,
    required_power,
    residual_cycles,
    server_energy,
    server_queue_step,
    wd_queue_step,
)
from .state import ServerState, WdAction, WdState, as_rates

__all__ = [
    "ServerState",
    "StageCosts",
    "SystemConfig",
    "Topology",
    "WdAction",
    "WdParams",
    "WdState",
    "achievable_bits",
    "as_rates",
    "executed_server_rates",
    "intermediate_output_size",
    "local_energy",
    "mean_channel_gain",
    "noise_power",
    "offload_energy",
    "pathloss_db",
    "place_wds",
    "required_power",
    "residual_cycles",
    "sample_arrivals",
    "sample_channel",
    "server_energy",
    "server_queue_step",
    "server_stage_cost",
    "stage_costs",
    "wd_queue_step",
    "wd_stage_cost",
]
