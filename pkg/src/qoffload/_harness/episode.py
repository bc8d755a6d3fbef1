import math
from dataclasses import dataclass, field

import numpy as np

from qoffload._baselines import baseline_decide
from qoffload._diagnostics import Prop1Report, prop1_monitor
from qoffload._env_model import (
    ServerState,
    Topology,
    WdAction,
    WdState,
    executed_server_rates,
    local_energy,
    mean_channel_gain,
    offload_energy,
    place_wds,
    sample_arrivals,
    sample_channel,
    server_energy,
    server_queue_step,
    stage_costs,
    wd_queue_step,
)
from qoffload._harness.config import ExperimentConfig
from qoffload._harness.metrics import BlockMetrics, discounted_sum, nan_array, tail_bound
from qoffload._harness.seeds import SeedLedger
from qoffload._server_agent import ServerLearner, algorithm2_block
from qoffload._util.errors import LearnerDivergenceError
from qoffload._util.progress import ProgressCallback, ProgressTracker
from qoffload._wd_agent import WdLearner, algorithm1_block
from qoffload.codes import PolicyKind, RunStatus, ServerMode


@dataclass(eq=False)
class EpisodeResult:
    """Trace of one episode plus what is needed to replay it.

    Attributes:
        config: The experiment that was run.
        ledger: Random streams handed out during the run.
        topology: Device placement.
        metrics: One entry per completed block.
        status: `diverged` when a learner blew up; the trace stops before
            the block in which that happened.
        failure: Divergence message, if any.
        divergence: The divergence error itself.
        wd_learners: Device learners (proposed policy only).
        server_learner: Server learner (learning server only).
        channel_gains, arrivals, offloaded: (blocks, devices) arrays of the
            sampled gains, arrivals per block and offloaded cycles.
    """

    config: ExperimentConfig
    ledger: SeedLedger
    topology: Topology
    metrics: list[BlockMetrics] = field(default_factory=list)
    status: RunStatus = RunStatus.COMPLETED
    failure: str | None = None
    divergence: LearnerDivergenceError | None = None
    wd_learners: list[WdLearner] = field(default_factory=list)
    server_learner: ServerLearner | None = None
    channel_gains: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    arrivals: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    offloaded: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def blocks(self) -> int:
        return len(self.metrics)

    @property
    def total_costs(self) -> np.ndarray:
        return np.array([m.total_cost for m in self.metrics])

    @property
    def discounted_sum(self) -> float:
        return discounted_sum(self.total_costs, self.config.system.discount)

    @property
    def tail_bound(self) -> float:
        max_cost = float(self.total_costs.max()) if self.blocks else 0.0
        return tail_bound(max_cost, self.config.system.discount, self.blocks)

    def wd_grad_norms(self) -> np.ndarray:
        return np.array([m.wd_grad_norms for m in self.metrics]).reshape(
            self.blocks, self.config.system.num_wds
        )

    def server_grad_norms(self) -> np.ndarray:
        return np.array([m.server_grad_norm for m in self.metrics])

    def convergence(self) -> dict[str, int | None]:
        """Blocks each learner needed to meet its stopping rule (None if it never did)."""
        found: dict[str, int | None] = {
            learner.name: learner.converged_at for learner in self.wd_learners
        }
        if self.server_learner is not None:
            found[self.server_learner.name] = self.server_learner.converged_at
        return found

    def prop1_reports(self) -> dict[str, Prop1Report]:
        """Stationarity monitor per learner kind, devices pooled as samples."""
        gamma = self.config.system.discount
        reports: dict[str, Prop1Report] = {}
        if self.wd_learners and self.blocks:
            reports["wd"] = prop1_monitor(
                [learner.first_sq_td_error or 0.0 for learner in self.wd_learners],
                self.wd_grad_norms().T,
                gamma,
            )
        if self.server_learner is not None and self.blocks:
            reports["server"] = prop1_monitor(
                [self.server_learner.first_sq_td_error or 0.0],
                [self.server_grad_norms()],
                gamma,
            )
        return reports

    def summary(self) -> dict:
        costs = self.total_costs
        return {
            "status": self.status.value,
            "failure": self.failure,
            "blocks_completed": self.blocks,
            "horizon_blocks": self.config.horizon_blocks,
            "discounted_sum": self.discounted_sum,
            "tail_bound": self.tail_bound,
            "mean_cost": float(costs.mean()) if costs.size else 0.0,
            "convergence": self.convergence(),
            "prop1": {kind: report.to_dict() for kind, report in self.prop1_reports().items()},
            "topology": {
                "distances_m": self.topology.distances_m.tolist(),
                "shadow_factors": self.topology.shadow_factors.tolist(),
            },
            "config": self.config.to_dict(),
            "seeds": self.ledger.to_dict(),
        }


def run_episode(
    config: ExperimentConfig, callback: ProgressCallback | None = None
) -> EpisodeResult:
    """Simulate `config.horizon_blocks` blocks of the MEC system.

    Block t: every device sees its backlog, channel and arrivals, decides,
    computes locally and offloads; server block t then runs on the backlog it
    had at the start of the block and receives the residuals of device block t
    at its end, so they are visible to the server from block t + 1 on. After
    the next observations are sampled, the learners update online.

    Sampling and queue stepping follow device index order, which makes the
    trace a function of the seeds alone.
    """
    config.validate()
    system = config.system
    num_wds = system.num_wds
    n = system.slots_per_block
    horizon = config.horizon_blocks
    gamma = system.discount
    ledger = SeedLedger(config.seed, dict(config.stream_overrides))
    topology = place_wds(ledger.generator("placement"), system)
    channel_rngs = [ledger.generator(f"wd{k}.channel") for k in range(num_wds)]
    arrival_rngs = [ledger.generator(f"wd{k}.arrival") for k in range(num_wds)]
    policy_rngs = [ledger.generator(f"wd{k}.policy") for k in range(num_wds)]

    result = EpisodeResult(config=config, ledger=ledger, topology=topology)
    if config.policy is PolicyKind.PROPOSED:
        result.wd_learners = [
            WdLearner.create(
                system,
                mean_channel_gain(
                    float(topology.distances_m[k]),
                    system,
                    float(topology.shadow_factors[k]),
                    k,
                ),
                ledger.integer_seed(f"wd{k}.bank"),
                k,
            )
            for k in range(num_wds)
        ]
    if config.server_mode is ServerMode.LEARNING:
        result.server_learner = ServerLearner.create(system, ledger.integer_seed("server_bank"))
    fixed_rates = np.full(n, system.fixed_server_rate)

    def observe(k: int, queue_cycles: float) -> WdState:
        arrivals = sample_arrivals(arrival_rngs[k], system.wd_params(k).arrival_prob, n)
        gain = sample_channel(
            channel_rngs[k],
            float(topology.distances_m[k]),
            system,
            float(topology.shadow_factors[k]),
            k,
        )
        return WdState(queue_cycles, gain, arrivals)

    gains = np.zeros((horizon, num_wds))
    arrivals = np.zeros((horizon, num_wds))
    offloaded = np.zeros((horizon, num_wds))

    backlog = system.initial_wd_tasks * system.task_cycles
    states = [observe(k, backlog) for k in range(num_wds)]
    server_queue = 0.0
    for learner, state in zip(result.wd_learners, states):
        learner.act(state, system)

    tracker = ProgressTracker(
        callback, f"Episode {config.policy.value}/seed {config.seed}", total_steps=1,
        report_every=max(1, horizon // 100),
    )
    tracker.update(step_name="Simulate blocks")
    cumulative = 0.0
    weight = 1.0
    for t in range(horizon):
        actions: list[WdAction] = []
        for k in range(num_wds):
            if result.wd_learners:
                action = result.wd_learners[k].action
                assert action is not None
            else:
                action = baseline_decide(config.policy, states[k], system, policy_rngs[k], k)
            actions.append(action)

        wd_queues = np.array([s.queue_cycles for s in states])
        e_local = np.array([local_energy(a.cpu_rates, system, k) for k, a in enumerate(actions)])
        e_off = np.array([offload_energy(a.power, system) for a in actions])
        residuals = np.array([a.offload_cycles for a in actions])
        next_queues = [
            wd_queue_step(s.queue_cycles, a.cpu_rates, s.arrivals, system, a.offload_cycles)
            for s, a in zip(states, actions)
        ]

        server_rates = (
            result.server_learner.rates.copy() if result.server_learner is not None else fixed_rates
        )
        e_ser = server_energy(executed_server_rates(server_queue, server_rates, system), system)
        next_server_queue = server_queue_step(server_queue, server_rates, residuals, system)
        costs = stage_costs(server_queue, e_ser, wd_queues, e_local + e_off, system)

        next_states = [observe(k, next_queues[k]) for k in range(num_wds)]
        for k, s in enumerate(states):
            gains[t, k] = s.channel_gain
            arrivals[t, k] = s.arrivals.sum()
        offloaded[t] = residuals

        wd_td, wd_norms, wd_changes = nan_array(num_wds), nan_array(num_wds), nan_array(num_wds)
        ser_td = ser_norm = ser_change = math.nan
        try:
            for k, learner in enumerate(result.wd_learners):
                jitter = 0.0
                if system.action_jitter_std > 0.0:
                    jitter = system.action_jitter_std * float(policy_rngs[k].standard_normal())
                update = algorithm1_block(learner, states[k], next_states[k], system, jitter, block=t)
                wd_td[k], wd_norms[k], wd_changes[k] = (
                    update.td_error,
                    update.grad_norm,
                    update.rel_change,
                )
            if result.server_learner is not None:
                server_update = algorithm2_block(
                    result.server_learner,
                    ServerState(server_queue, wd_queues),
                    ServerState(next_server_queue, next_queues),
                    system,
                    block=t,
                )
                ser_td = server_update.td_error
                ser_norm = server_update.grad_norm
                ser_change = server_update.rel_change
        except LearnerDivergenceError as exc:
            result.status = RunStatus.DIVERGED
            result.failure = str(exc)
            result.divergence = exc
            break

        cumulative += weight * float(costs.centralized)
        weight *= gamma
        result.metrics.append(
            BlockMetrics(
                block=t,
                wd_costs=costs.wds,
                wd_local_energy=e_local,
                wd_offload_energy=e_off,
                wd_queues=wd_queues,
                wd_td_errors=wd_td,
                wd_grad_norms=wd_norms,
                wd_rel_changes=wd_changes,
                server_cost=float(costs.server),
                server_energy=e_ser,
                server_queue=server_queue,
                server_td_error=ser_td,
                server_grad_norm=ser_norm,
                server_rel_change=ser_change,
                total_cost=float(costs.centralized),
                discounted_cum=cumulative,
            )
        )
        states, server_queue = next_states, next_server_queue
        tracker.tick(t + 1, horizon)

    done = result.blocks
    result.channel_gains = gains[:done]
    result.arrivals = arrivals[:done]
    result.offloaded = offloaded[:done]
    return result
