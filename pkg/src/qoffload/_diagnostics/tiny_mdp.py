"""Discretized single-device offloading MDP solved exactly by value iteration."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numba import njit  # type: ignore[attr-defined]

from qoffload._env_model import SystemConfig, WdAction, WdState, required_power, wd_queue_step
from qoffload._util.constants import VALUE_ITERATION_MAX_SWEEPS, VALUE_ITERATION_TOLERANCE
from qoffload._util.errors import OracleConvergenceError
from qoffload._wd_agent import project_action, wd_reward

NUM_QUEUE_LEVELS = 9  # 0, W/4, ..., 2W
NUM_POWER_LEVELS = 5
TINY_MEAN_GAIN = 0.5

QEvaluator = Callable[[int, int], float]


def tiny_config(**changes) -> SystemConfig:
    """One device, one compute slot per block, everything else at defaults."""
    base = {"num_wds": 1, "slots_per_block": 1}
    base.update(changes)
    return SystemConfig.from_dict(base)


@njit
def value_iteration_kernel(
    costs: np.ndarray,
    next_queue: np.ndarray,
    gain_probs: np.ndarray,
    arrival_probs: np.ndarray,
    discount: float,
    tolerance: float,
    max_sweeps: int,
) -> tuple[np.ndarray, int, float]:
    """Q iteration on states s = (queue * G + gain) * 2 + arrival.

    Returns:
        tuple[np.ndarray, int, float]: (Q table, sweeps run, last sup-norm change)
    """
    num_states, num_actions = costs.shape
    num_gains = gain_probs.shape[0]
    q = np.zeros((num_states, num_actions))
    values = np.zeros(num_states)
    change = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        for s in range(num_states):
            best = q[s, 0]
            for a in range(1, num_actions):
                if q[s, a] < best:
                    best = q[s, a]
            values[s] = best
        change = 0.0
        for s in range(num_states):
            for a in range(num_actions):
                expected = 0.0
                base = next_queue[s, a] * num_gains
                for g in range(num_gains):
                    for b in range(2):
                        expected += gain_probs[g] * arrival_probs[b] * values[(base + g) * 2 + b]
                updated = costs[s, a] + discount * expected
                diff = abs(updated - q[s, a])
                if diff > change:
                    change = diff
                q[s, a] = updated
        if change <= tolerance:
            break
    return q, sweeps, change


@dataclass(frozen=True, eq=False)
class TinyInstance:
    """Enumerated single-device MDP.

    States are (queue level, gain level, arrival bit); actions index a fixed
    grid of proposed powers, each projected onto the state like the learner's.

    Attributes:
        config: Constants (one device, one slot).
        queue_levels: Queue values in cycles, W/4 apart.
        gains: The two channel gains.
        mean_gain: Gain the two levels are centered on (feature scale).
        powers: Proposed power grid.
        costs: (S, A) stage costs of the projected actions.
        executed_power: (S, A) power after projection.
        next_queue: (S, A) index of the next queue level.
    """

    config: SystemConfig
    queue_levels: np.ndarray
    gains: np.ndarray
    mean_gain: float
    powers: np.ndarray
    costs: np.ndarray
    executed_power: np.ndarray
    next_queue: np.ndarray

    @property
    def num_states(self) -> int:
        return int(self.costs.shape[0])

    @property
    def num_actions(self) -> int:
        return int(self.costs.shape[1])

    @property
    def arrival_prob(self) -> float:
        return self.config.wd_params(0).arrival_prob

    @property
    def gain_probs(self) -> np.ndarray:
        return np.full(self.gains.shape[0], 1.0 / self.gains.shape[0])

    @property
    def arrival_probs(self) -> np.ndarray:
        return np.array([1.0 - self.arrival_prob, self.arrival_prob])

    def state_index(self, queue_index: int, gain_index: int, arrival: int) -> int:
        return (queue_index * self.gains.shape[0] + gain_index) * 2 + arrival

    def decode(self, s: int) -> tuple[int, int, int]:
        rest, arrival = divmod(s, 2)
        queue_index, gain_index = divmod(rest, self.gains.shape[0])
        return queue_index, gain_index, arrival

    def wd_state(self, s: int) -> WdState:
        qi, gi, arrival = self.decode(s)
        return WdState(self.queue_levels[qi], self.gains[gi], [float(arrival)])

    def snap_queue(self, queue_cycles: float) -> int:
        step = self.queue_levels[1] - self.queue_levels[0]
        return int(min(max(round(queue_cycles / step), 0), self.queue_levels.shape[0] - 1))

    def transition(self, s: int, power: float) -> tuple[WdAction, float, int]:
        """Project `power` in state `s`; returns (action, cost, next queue index)."""
        state = self.wd_state(s)
        action = project_action(power, state, self.config)
        cost = wd_reward(state.queue_cycles, action.cpu_rates, action.power, self.config)
        next_q = wd_queue_step(
            state.queue_cycles, action.cpu_rates, state.arrivals, self.config, action.offload_cycles
        )
        return action, cost, self.snap_queue(next_q)

    def next_distribution(self, queue_index: int) -> list[tuple[int, float]]:
        """(next state, probability) pairs for a given next queue level."""
        pairs = []
        for g, pg in enumerate(self.gain_probs):
            for b, pb in enumerate(self.arrival_probs):
                if pg * pb > 0.0:
                    pairs.append((self.state_index(queue_index, g, b), float(pg * pb)))
        return pairs

    def sample_next(self, queue_index: int, rng: np.random.Generator) -> int:
        gain_index = int(rng.integers(self.gains.shape[0]))
        arrival = int(rng.random() < self.arrival_prob)
        return self.state_index(queue_index, gain_index, arrival)


def build_tiny_instance(
    config: SystemConfig | None = None, mean_gain: float = TINY_MEAN_GAIN
) -> TinyInstance:
    """Enumerate the default tiny instance.

    Queue levels run from 0 to 2W in steps of W/4, the gain is mean_gain/2 or
    2*mean_gain and the power grid holds the powers that offload 0, 1/4, 1/2,
    3/4 and 1 task at the mean gain.
    """
    config = tiny_config() if config is None else config
    if config.num_wds != 1 or config.slots_per_block != 1:
        raise ValueError("the tiny instance needs num_wds = 1 and slots_per_block = 1")
    task = config.task_cycles
    queue_levels = np.arange(NUM_QUEUE_LEVELS) * task / 4.0
    gains = np.array([mean_gain / 2.0, 2.0 * mean_gain])
    fractions = np.linspace(0.0, 1.0, NUM_POWER_LEVELS)
    powers = np.array(
        [required_power(config.bits_per_cycle * f * task, mean_gain, config) for f in fractions]
    )
    num_states = NUM_QUEUE_LEVELS * gains.shape[0] * 2
    costs = np.zeros((num_states, NUM_POWER_LEVELS))
    executed = np.zeros((num_states, NUM_POWER_LEVELS))
    next_queue = np.zeros((num_states, NUM_POWER_LEVELS), dtype=np.int64)
    instance = TinyInstance(
        config, queue_levels, gains, mean_gain, powers, costs, executed, next_queue
    )
    for s in range(num_states):
        for a, power in enumerate(powers):
            action, cost, nq = instance.transition(s, float(power))
            costs[s, a] = cost
            executed[s, a] = action.power
            next_queue[s, a] = nq
    return instance


@dataclass(frozen=True, eq=False)
class OracleSolution:
    q_table: np.ndarray
    sweeps: int
    change: float

    @property
    def values(self) -> np.ndarray:
        return self.q_table.min(axis=1)

    @property
    def policy(self) -> np.ndarray:
        return self.q_table.argmin(axis=1)


def value_iteration_oracle(
    instance: TinyInstance,
    tolerance: float = VALUE_ITERATION_TOLERANCE,
    max_sweeps: int = VALUE_ITERATION_MAX_SWEEPS,
) -> OracleSolution:
    """Optimal Q table of the tiny instance.

    Raises:
        OracleConvergenceError: If the sup-norm change stays above `tolerance`.
    """
    q, sweeps, change = value_iteration_kernel(
        instance.costs,
        instance.next_queue,
        instance.gain_probs,
        instance.arrival_probs,
        instance.config.discount,
        tolerance,
        max_sweeps,
    )
    if not change <= tolerance:
        raise OracleConvergenceError(
            f"value iteration still moved by {change:.3g} after {sweeps} sweeps"
        )
    return OracleSolution(q_table=q, sweeps=int(sweeps), change=float(change))


def table_evaluator(q_table: np.ndarray) -> QEvaluator:
    return lambda s, a: float(q_table[s, a])


def evaluate_policy(instance: TinyInstance, policy) -> np.ndarray:
    """Exact discounted cost of a deterministic grid policy from every state."""
    policy = np.asarray(policy, dtype=np.int64)
    n = instance.num_states
    transition = np.zeros((n, n))
    stage = np.zeros(n)
    for s in range(n):
        a = int(policy[s])
        stage[s] = instance.costs[s, a]
        for s_next, prob in instance.next_distribution(int(instance.next_queue[s, a])):
            transition[s, s_next] += prob
    return np.linalg.solve(np.eye(n) - instance.config.discount * transition, stage)


def _rollout(
    instance: TinyInstance,
    costs: np.ndarray,
    next_queue: np.ndarray,
    rng: np.random.Generator,
    episodes: int,
    horizon: int,
    start_queue_index: int,
) -> float:
    gamma = instance.config.discount
    total = 0.0
    for _ in range(episodes):
        s = instance.sample_next(start_queue_index, rng)
        discounted = 0.0
        weight = 1.0
        for _ in range(horizon):
            discounted += weight * costs[s]
            weight *= gamma
            s = instance.sample_next(int(next_queue[s]), rng)
        total += discounted
    return total / episodes


def rollout_cost(
    instance: TinyInstance,
    policy,
    rng: np.random.Generator,
    episodes: int = 50,
    horizon: int = 200,
    start_queue_index: int = 0,
) -> float:
    """Monte-Carlo discounted cost of a grid policy, averaged over episodes."""
    policy = np.asarray(policy, dtype=np.int64)
    states = np.arange(instance.num_states)
    return _rollout(
        instance,
        instance.costs[states, policy],
        instance.next_queue[states, policy],
        rng,
        episodes,
        horizon,
        start_queue_index,
    )


def power_rollout_cost(
    instance: TinyInstance,
    power: float,
    rng: np.random.Generator,
    episodes: int = 50,
    horizon: int = 200,
    start_queue_index: int = 0,
) -> float:
    """`rollout_cost` of proposing the same (off-grid) power in every state.

    Draws from `rng` exactly like `rollout_cost`, so both can share a stream.
    """
    costs = np.zeros(instance.num_states)
    next_queue = np.zeros(instance.num_states, dtype=np.int64)
    for s in range(instance.num_states):
        _, costs[s], next_queue[s] = instance.transition(s, power)
    return _rollout(instance, costs, next_queue, rng, episodes, horizon, start_queue_index)


def greedy_policy(instance: TinyInstance, evaluator: QEvaluator) -> np.ndarray:
    return np.array(
        [
            min(range(instance.num_actions), key=lambda a, s=s: evaluator(s, a))
            for s in range(instance.num_states)
        ],
        dtype=np.int64,
    )


def bellman_residual(
    evaluator: QEvaluator,
    instance: TinyInstance,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Mean squared Bellman optimality residual over random (state, action) pairs.

    The expectation over the next gain and arrival is taken exactly, so an
    exact solution has (numerically) zero residual.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    gamma = instance.config.discount
    cache: dict[int, float] = {}

    def best_value(s: int) -> float:
        if s not in cache:
            cache[s] = min(evaluator(s, a) for a in range(instance.num_actions))
        return cache[s]

    total = 0.0
    for _ in range(samples):
        s = int(rng.integers(instance.num_states))
        a = int(rng.integers(instance.num_actions))
        expected = sum(
            prob * best_value(s_next)
            for s_next, prob in instance.next_distribution(int(instance.next_queue[s, a]))
        )
        residual = instance.costs[s, a] + gamma * expected - evaluator(s, a)
        total += residual * residual
    return total / samples
