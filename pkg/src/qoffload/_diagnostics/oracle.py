import math
from dataclasses import dataclass, field

import numpy as np

from qoffload._diagnostics.tiny_mdp import (
    QEvaluator,
    TinyInstance,
    bellman_residual,
    build_tiny_instance,
    greedy_policy,
    power_rollout_cost,
    rollout_cost,
    table_evaluator,
    value_iteration_oracle,
)
from qoffload._env_model import wd_queue_step
from qoffload._util.progress import ProgressCallback, ProgressTracker
from qoffload._wd_agent import WdLearner, algorithm1_block

DEFAULT_TRAINING_BLOCKS = 2000
DEFAULT_RESIDUAL_SAMPLES = 2000
COST_GAP_TOLERANCE = 0.15
RESIDUAL_IMPROVEMENT_SHARE = 0.9


def learner_evaluator(learner: WdLearner, instance: TinyInstance) -> QEvaluator:
    """Learned Q at a grid action, scored at the power the action really uses."""

    def evaluate(s: int, a: int) -> float:
        return learner.q_estimate(float(instance.executed_power[s, a]), instance.wd_state(s))

    return evaluate


def train_tiny_learner(
    instance: TinyInstance, seed: int, blocks: int = DEFAULT_TRAINING_BLOCKS
) -> tuple[WdLearner, WdLearner]:
    """Run the device learner online on the tiny kernel.

    Returns:
        tuple[WdLearner, WdLearner]: (trained learner, copy taken before training)
    """
    bank_seq, env_seq = np.random.SeedSequence(seed).spawn(2)
    bank_seed = int(bank_seq.generate_state(1)[0])
    rng = np.random.default_rng(env_seq)
    config = instance.config
    learner = WdLearner.create(config, instance.mean_gain, bank_seed)
    untrained = WdLearner.from_dict(learner.to_dict())
    s = instance.sample_next(0, rng)
    state = instance.wd_state(s)
    learner.act(state, config)
    for block in range(blocks):
        action = learner.action
        assert action is not None
        next_q = wd_queue_step(
            state.queue_cycles, action.cpu_rates, state.arrivals, config, action.offload_cycles
        )
        s_next = instance.sample_next(instance.snap_queue(next_q), rng)
        next_state = instance.wd_state(s_next)
        algorithm1_block(learner, state, next_state, config, block=block)
        s, state = s_next, next_state
    return learner, untrained


@dataclass(frozen=True)
class OracleSeedResult:
    seed: int
    oracle_cost: float
    learned_cost: float
    greedy_cost: float
    trained_residual: float
    untrained_residual: float

    @property
    def residual_improved(self) -> bool:
        return self.trained_residual < self.untrained_residual


@dataclass
class OracleCompareReport:
    """Learned-versus-optimal comparison on the tiny instance."""

    oracle_sweeps: int
    oracle_residual: float
    results: list[OracleSeedResult] = field(default_factory=list)

    @property
    def oracle_cost(self) -> float:
        return float(np.mean([r.oracle_cost for r in self.results]))

    @property
    def learned_cost(self) -> float:
        return float(np.mean([r.learned_cost for r in self.results]))

    @property
    def greedy_cost(self) -> float:
        return float(np.mean([r.greedy_cost for r in self.results]))

    @property
    def cost_gap(self) -> float:
        if self.oracle_cost == 0.0:
            return 0.0 if self.learned_cost == 0.0 else math.inf
        return self.learned_cost / self.oracle_cost - 1.0

    @property
    def improved_seeds(self) -> int:
        return sum(r.residual_improved for r in self.results)

    @property
    def passed(self) -> bool:
        enough = math.ceil(RESIDUAL_IMPROVEMENT_SHARE * len(self.results))
        return self.cost_gap <= COST_GAP_TOLERANCE and self.improved_seeds >= enough

    def to_dict(self) -> dict:
        return {
            "oracle_sweeps": self.oracle_sweeps,
            "oracle_residual": self.oracle_residual,
            "oracle_cost": self.oracle_cost,
            "learned_cost": self.learned_cost,
            "greedy_cost": self.greedy_cost,
            "cost_gap": self.cost_gap,
            "cost_gap_tolerance": COST_GAP_TOLERANCE,
            "improved_seeds": self.improved_seeds,
            "num_seeds": len(self.results),
            "passed": self.passed,
            "seeds": [
                {
                    "seed": r.seed,
                    "oracle_cost": r.oracle_cost,
                    "learned_cost": r.learned_cost,
                    "greedy_cost": r.greedy_cost,
                    "trained_residual": r.trained_residual,
                    "untrained_residual": r.untrained_residual,
                }
                for r in self.results
            ],
        }


def oracle_compare(
    num_seeds: int = 10,
    master_seed: int = 0,
    instance: TinyInstance | None = None,
    blocks: int = DEFAULT_TRAINING_BLOCKS,
    residual_samples: int = DEFAULT_RESIDUAL_SAMPLES,
    callback: ProgressCallback | None = None,
) -> OracleCompareReport:
    """Train one device learner per seed on the tiny instance and score it.

    Each seed rolls out the learner's final power iterate, proposed in every
    state, against the optimal grid policy on the same random stream, and
    compares the Bellman residual of the trained Q with that of the untrained
    one. The greedy grid policy of the learned Q is rolled out as well and
    reported next to them.
    """
    if num_seeds < 1:
        raise ValueError(f"num_seeds must be >= 1, got {num_seeds}")
    instance = build_tiny_instance() if instance is None else instance
    tracker = ProgressTracker(callback, "Oracle comparison", total_steps=2)
    tracker.update(step_name="Value iteration")
    solution = value_iteration_oracle(instance)
    check_rng = np.random.default_rng(master_seed)
    report = OracleCompareReport(
        oracle_sweeps=solution.sweeps,
        oracle_residual=bellman_residual(
            table_evaluator(solution.q_table), instance, residual_samples, check_rng
        ),
    )
    tracker.update(step_name="Train learners")
    seeds = np.random.SeedSequence(master_seed).spawn(num_seeds)
    for i, seed_seq in enumerate(seeds):
        seed = int(seed_seq.generate_state(1)[0])
        trained, untrained = train_tiny_learner(instance, seed, blocks)
        greedy = greedy_policy(instance, learner_evaluator(trained, instance))
        rollout_seed = seed + 1
        report.results.append(
            OracleSeedResult(
                seed=seed,
                oracle_cost=rollout_cost(
                    instance, solution.policy, np.random.default_rng(rollout_seed)
                ),
                learned_cost=power_rollout_cost(
                    instance, trained.power, np.random.default_rng(rollout_seed)
                ),
                greedy_cost=rollout_cost(
                    instance, greedy, np.random.default_rng(rollout_seed)
                ),
                trained_residual=bellman_residual(
                    learner_evaluator(trained, instance),
                    instance,
                    residual_samples,
                    np.random.default_rng(seed),
                ),
                untrained_residual=bellman_residual(
                    learner_evaluator(untrained, instance),
                    instance,
                    residual_samples,
                    np.random.default_rng(seed),
                ),
            )
        )
        tracker.tick(i + 1, num_seeds, unit="Seed")
    return report
