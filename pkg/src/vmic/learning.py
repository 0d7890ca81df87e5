"""Tabular Q-learning primitives for the per-base-station power-control agents.

An agent's state is ``(connected_count, power_index)`` and its action is a
``(channel, power_index)`` pair. Actions are indexed lexicographically:
``index = channel * n_powers + power_index``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

QTABLE_SCHEMA = "qtable/1"


class LearningConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LearningConfig:
    """Hyperparameters of one agent.

    The learning rate follows ``alpha0 / alpha_decay**t`` unless ``schedule``
    is given, in which case ``schedule(t)`` is used verbatim.
    """

    discount: float = 0.9
    alpha0: float = 0.001
    alpha_decay: float = 1.000001
    greedy_prob: float = 0.95
    max_iterations: int = 300
    schedule: Optional[Callable[[int], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if not 0.0 < self.discount <= 1.0:
            raise LearningConfigError(f"discount must lie in (0, 1], got {self.discount!r}")
        if not 0.9 < self.greedy_prob <= 1.0:
            raise LearningConfigError(
                f"greedy probability must lie in (0.9, 1], got {self.greedy_prob!r}"
            )
        if not 0.0 < self.alpha0 <= 1.0:
            raise LearningConfigError(f"alpha0 must lie in (0, 1], got {self.alpha0!r}")
        if not self.alpha_decay >= 1.0:
            raise LearningConfigError("alpha_decay must be >= 1")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise LearningConfigError("max_iterations must be a positive integer")

    def learning_rate(self, t: int) -> float:
        if self.schedule is not None:
            return float(self.schedule(t))
        return learning_rate(t, self.alpha0, self.alpha_decay)


def learning_rate(t: int, alpha0: float = 0.001, decay: float = 1.000001) -> float:
    """Exponentially decaying step size ``alpha0 / decay**t``."""
    if t < 0:
        raise ValueError("iteration index must be non-negative")
    return alpha0 * math.exp(-t * math.log(decay))


@dataclass(frozen=True)
class ActionSpace:
    n_channels: int
    power_levels: tuple[float, ...]

    def __post_init__(self):
        levels = tuple(float(p) for p in self.power_levels)
        object.__setattr__(self, "power_levels", levels)
        if self.n_channels < 1 or not levels:
            raise ValueError("action space needs at least one channel and one power level")
        if any(p <= 0 for p in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("power levels must be positive and strictly increasing")

    @property
    def n_powers(self) -> int:
        return len(self.power_levels)

    @property
    def size(self) -> int:
        return self.n_channels * self.n_powers

    def index(self, channel: int, power_index: int) -> int:
        return channel * self.n_powers + power_index

    def decode(self, action: int) -> tuple[int, int]:
        return divmod(int(action), self.n_powers)


class QTable:
    """Q-values and visit counts over ``(n_co, power_index) x action``."""

    def __init__(self, actions: ActionSpace, max_connected: int):
        self.actions = actions
        self.max_connected = int(max_connected)
        n_states = (self.max_connected + 1) * actions.n_powers
        self.values = np.zeros((n_states, actions.size))
        self.visits = np.zeros((n_states, actions.size), dtype=np.int64)

    def state_index(self, state: tuple[int, int]) -> int:
        n_co, p = state
        if not (0 <= n_co <= self.max_connected and 0 <= p < self.actions.n_powers):
            raise ValueError(f"state {state} outside the state space")
        return n_co * self.actions.n_powers + p

    def row(self, state) -> np.ndarray:
        return self.values[self.state_index(state)]

    def greedy(self, state) -> int:
        return int(np.argmax(self.row(state)))  # argmax ties -> lowest index

    def copy(self) -> "QTable":
        other = QTable(self.actions, self.max_connected)
        other.values[:] = self.values
        other.visits[:] = self.visits
        return other


def select_action(table: QTable, state, greedy_prob: float, rng: np.random.Generator) -> int:
    """Greedy action with probability ``greedy_prob``, else uniform over all actions."""
    explore = rng.random() >= greedy_prob
    random_action = int(rng.integers(table.actions.size))
    return random_action if explore else table.greedy(state)


def update_q(
    table: QTable,
    state,
    action: int,
    reward: float,
    next_state,
    alpha: float,
    discount: float,
) -> float:
    """One temporal-difference step on ``Q(state, action)``; returns the applied change."""
    if not math.isfinite(reward):
        raise ValueError(f"reward must be finite, got {reward!r}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"learning rate must lie in (0, 1], got {alpha!r}")
    if not 0.0 <= discount <= 1.0:
        raise ValueError(f"discount must lie in [0, 1], got {discount!r}")
    s = table.state_index(state)
    target = reward + discount * float(np.max(table.row(next_state)))
    delta = alpha * (target - table.values[s, action])
    table.values[s, action] += delta
    table.visits[s, action] += 1
    return float(delta)


# -- snapshots ----------------------------------------------------------------


def write_qtable(table: QTable, fh) -> None:
    """Flat text snapshot: one ``state, action, value`` row per entry."""
    fh.write(f"# schema: {QTABLE_SCHEMA}\n")
    fh.write(f"# n_channels={table.actions.n_channels} max_connected={table.max_connected}\n")
    fh.write("# power_levels=" + ";".join(repr(p) for p in table.actions.power_levels) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n_co", "state_power_index", "action_channel", "action_power_index", "value", "visits"])
    n_pow = table.actions.n_powers
    for s in range(table.values.shape[0]):
        n_co, p = divmod(s, n_pow)
        for a in range(table.actions.size):
            ch, ap = table.actions.decode(a)
            w.writerow([n_co, p, ch, ap, repr(float(table.values[s, a])), int(table.visits[s, a])])


def read_qtable(fh) -> QTable:
    meta = {}
    lines = []
    for line in fh:
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("schema:"):
                if body.split(":", 1)[1].strip() != QTABLE_SCHEMA:
                    raise ValueError(f"unsupported Q-table schema: {body}")
            else:
                for part in body.split():
                    k, _, v = part.partition("=")
                    meta[k] = v
        else:
            lines.append(line)
    try:
        levels = tuple(float(v) for v in meta["power_levels"].split(";"))
        table = QTable(ActionSpace(int(meta["n_channels"]), levels), int(meta["max_connected"]))
    except KeyError as exc:
        raise ValueError(f"Q-table snapshot is missing header field {exc}") from exc
    for row in csv.DictReader(io.StringIO("".join(lines))):
        s = table.state_index((int(row["n_co"]), int(row["state_power_index"])))
        a = table.actions.index(int(row["action_channel"]), int(row["action_power_index"]))
        table.values[s, a] = float(row["value"])
        table.visits[s, a] = int(row["visits"])
    return table


def max_abs_delta(deltas: Iterable[float]) -> float:
    return max((abs(d) for d in deltas), default=0.0)
