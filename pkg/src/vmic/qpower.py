"""Distributed multiagent Q-learning power control over the cellular network.

Every base station is an independent agent with its own Q-table. Agents
act in lock-step: at each iteration the environment advances, all agents
pick an action against the same world snapshot, rewards are measured, and
every table is updated at the iteration barrier.

Randomness comes from one ``SeedSequence`` spawned into an environment
stream (placement, mobility, AVI resampling, sampled fading) and one stream
per agent (exploration), so learning can be replayed in a frozen world.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fading import polarization_gain
from .learning import ActionSpace, QTable, select_action, update_q
from .network import LinkTables, Scenario, World, evaluate, link_tables, place_users, step_mobility

TRACE_SCHEMA = "trace/1"
TRACE_COLUMNS = ("iteration", "cell", "action_channel", "action_power_W", "n_co", "reward", "max_Q_delta")
BOUND_RTOL = 1e-12


class RewardBoundError(RuntimeError):
    """A cell's reward exceeded its no-interference utility."""


@dataclass
class LearningResult:
    scenario: Scenario
    channels: np.ndarray  # (T, K)
    power_index: np.ndarray  # (T, K)
    connected: np.ndarray
    reward: np.ndarray
    bound: np.ndarray
    max_delta: np.ndarray
    greedy_utility: Optional[np.ndarray]
    tables: list[QTable]
    states: list[tuple[int, int]]
    world: World
    links: LinkTables = field(repr=False)

    @property
    def iterations(self) -> int:
        return self.reward.shape[0]

    @property
    def greedy_actions(self) -> list[tuple[int, int]]:
        """Each agent's greedy ``(channel, power_index)`` in its final state."""
        return [t.actions.decode(t.greedy(s)) for t, s in zip(self.tables, self.states)]

    @property
    def final_strategies(self) -> list[tuple[int, int]]:
        """The stationary profile reached by joint greedy play from the final states.

        The last iteration may have been exploratory and left an agent in a
        rarely visited state; the learned strategy is what greedy play settles
        on from there. When greedy play cycles, the cycle's last profile is used.
        """
        return greedy_rollout(self.scenario, self.links, self.tables, self.states)[0]

    @property
    def greedy_cycle_length(self) -> int:
        return greedy_rollout(self.scenario, self.links, self.tables, self.states)[1]

    def bound_respected(self) -> bool:
        return bool(np.all(self.reward <= self.bound * (1 + BOUND_RTOL)))

    def write_trace(self, fh) -> None:
        fh.write(f"# schema: {TRACE_SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        levels = self.scenario.power_levels
        T, K = self.reward.shape
        for t in range(T):
            for k in range(K):
                w.writerow([
                    t, k, int(self.channels[t, k]), repr(levels[self.power_index[t, k]]),
                    int(self.connected[t, k]), repr(float(self.reward[t, k])), repr(float(self.max_delta[t, k])),
                ])


def _seed_streams(seed, K: int):
    ss = np.random.SeedSequence(seed)
    env, *agents = ss.spawn(K + 1)
    return np.random.default_rng(env), [np.random.default_rng(a) for a in agents]


def _sampled_fading(links: LinkTables, channels, rng) -> np.ndarray:
    K = len(channels)
    k = np.arange(K)
    sig = np.sqrt(links.sigma2[k, channels])
    y = np.clip(sig * rng.standard_normal(K), -1.0, 1.0)
    return np.asarray(polarization_gain(y, links.orientation[k, k, channels]), dtype=float)


def run_learning(
    scenario: Scenario,
    seed,
    iterations: Optional[int] = None,
    world: Optional[World] = None,
    track_greedy: bool = False,
) -> LearningResult:
    """Lock-step Q-learning for all cells of ``scenario``.

    ``world`` overrides the random initial placement. With
    ``track_greedy`` the utility of the greedy strategy profile is evaluated
    after every update (no exploration), alongside the realised rewards.
    """
    sc = scenario
    cfg = sc.learning
    T = cfg.max_iterations if iterations is None else int(iterations)
    if T < 1:
        raise ValueError("iterations must be positive")
    K, N = sc.cell_count, sc.users_per_cell
    env_rng, agent_rngs = _seed_streams(seed, K)
    if world is None:
        world = place_users(sc, env_rng)
    elif world.sigma2.shape != (K, N):
        raise ValueError("world does not match the scenario dimensions")
    space = ActionSpace(N, sc.power_levels)
    tables = [QTable(space, N) for _ in range(K)]
    states = [(0, 0)] * K
    levels = np.array(sc.power_levels)

    rec = {name: np.zeros((T, K), dtype=dt) for name, dt in (
        ("channels", int), ("power_index", int), ("connected", int),
        ("reward", float), ("bound", float), ("max_delta", float))}
    greedy_util = np.zeros((T, K)) if track_greedy else None

    links = link_tables(world)
    # a frozen world with mean-fading rewards is a deterministic function of the profile
    memo = {} if sc.frozen else None
    for t in range(T):
        if t > 0 and not sc.frozen:
            world = step_mobility(world, sc.slot_duration, env_rng)
            links = link_tables(world)
        actions = [select_action(tables[k], states[k], cfg.greedy_prob, agent_rngs[k]) for k in range(K)]
        decoded = np.array([space.decode(a) for a in actions])
        channels, pidx = decoded[:, 0], decoded[:, 1]
        if sc.reward_mode == "sampled":
            ev = evaluate(sc, links, channels, levels[pidx], _sampled_fading(links, channels, env_rng))
        elif memo is not None:
            key = (channels.tobytes(), pidx.tobytes())
            ev = memo.get(key)
            if ev is None:
                ev = memo[key] = evaluate(sc, links, channels, levels[pidx])
        else:
            ev = evaluate(sc, links, channels, levels[pidx])
        if np.any(ev.utility > ev.bound * (1 + BOUND_RTOL)):
            raise RewardBoundError(f"iteration {t}: reward above the no-interference bound")
        alpha = cfg.learning_rate(t)
        for k in range(K):
            nxt = (int(ev.connected[k]), int(pidx[k]))
            rec["max_delta"][t, k] = abs(
                update_q(tables[k], states[k], actions[k], float(ev.utility[k]), nxt, alpha, cfg.discount)
            )
            states[k] = nxt
        rec["channels"][t], rec["power_index"][t] = channels, pidx
        rec["connected"][t], rec["reward"][t], rec["bound"][t] = ev.connected, ev.utility, ev.bound
        if greedy_util is not None:
            g = np.array([space.decode(tables[k].greedy(states[k])) for k in range(K)])
            greedy_util[t] = evaluate(sc, links, g[:, 0], levels[g[:, 1]]).utility

    return LearningResult(sc, tables=tables, states=states, world=world, links=links,
                          greedy_utility=greedy_util, **rec)


def greedy_rollout(sc: Scenario, links: LinkTables, tables: list[QTable], states, max_steps: Optional[int] = None):
    """Play every agent greedily in a fixed world until the joint state repeats.

    Returns ``(profile, cycle_length)``; a cycle length of 1 is a fixed point.
    """
    levels = np.array(sc.power_levels)
    states = [tuple(s) for s in states]
    seen: dict[tuple, int] = {}
    profiles = []
    limit = max_steps if max_steps is not None else tables[0].values.shape[0] ** min(len(tables), 3) + 2
    for step in range(limit):
        key = tuple(states)
        if key in seen:
            return profiles[-1], step - seen[key]
        seen[key] = step
        prof = [t.actions.decode(t.greedy(s)) for t, s in zip(tables, states)]
        arr = np.array(prof)
        ev = evaluate(sc, links, arr[:, 0], levels[arr[:, 1]])
        states = [(int(ev.connected[k]), int(arr[k, 1])) for k in range(len(tables))]
        profiles.append(prof)
    return profiles[-1], 0


# -- analysis -----------------------------------------------------------------


def profile_utility(sc: Scenario, links: LinkTables, profile) -> np.ndarray:
    prof = np.asarray(profile, dtype=int).reshape(-1, 2)
    return evaluate(sc, links, prof[:, 0], np.array(sc.power_levels)[prof[:, 1]]).utility


def best_response(sc: Scenario, links: LinkTables, profile, k: int) -> tuple[tuple[int, int], float]:
    """Cell ``k``'s utility-maximising action with the other strategies held fixed."""
    prof = [tuple(p) for p in profile]
    best, best_u = None, -math.inf
    for ch in range(sc.users_per_cell):
        for p in range(len(sc.power_levels)):
            prof[k] = (ch, p)
            u = float(profile_utility(sc, links, prof)[k])
            if u > best_u:
                best, best_u = (ch, p), u
    return best, best_u


def deviation_gains(sc: Scenario, links: LinkTables, profile) -> np.ndarray:
    """Relative utility gain of every cell's best unilateral deviation."""
    current = profile_utility(sc, links, profile)
    gains = np.zeros(len(current))
    for k in range(len(current)):
        _, u = best_response(sc, links, profile, k)
        gains[k] = (u - current[k]) / current[k] if current[k] > 0 else (math.inf if u > 0 else 0.0)
    return gains


def is_nash(sc: Scenario, links: LinkTables, profile, tolerance: float = 0.01) -> bool:
    return bool(np.all(deviation_gains(sc, links, profile) <= tolerance))


def coefficient_of_variation(trace: np.ndarray, window: int = 50) -> np.ndarray:
    """Per-column ``std / mean`` over the last ``window`` rows."""
    tail = np.asarray(trace, dtype=float)[-window:]
    mean = tail.mean(axis=0)
    return np.where(mean > 0, tail.std(axis=0) / np.where(mean > 0, mean, 1.0), np.inf)


def stabilization_iteration(trace: np.ndarray, window: int = 50, tolerance: float = 0.05) -> Optional[int]:
    """First iteration at which every column's trailing-window CV drops below ``tolerance``."""
    trace = np.asarray(trace, dtype=float)
    for end in range(window, trace.shape[0] + 1):
        if np.all(coefficient_of_variation(trace[:end], window) < tolerance):
            return end
    return None
