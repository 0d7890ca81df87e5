"""Cellular vehicle MI network: layout, users, mobility and link accounting.

Geometry: ``x`` runs west to east across ``width``, ``y`` across ``height``.
The road is a plane whose depth falls linearly from ``z_west`` to
``z_east``; users ride on it and each base station coil hangs
``bs_height`` above the road at its cell centre. Cells are squares of side
``cell_side``.

TDMA: sub-channel ``n`` of cell ``k`` serves user ``n`` of that cell, so a
base station's channel choice is also its choice of served user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .circuit import (
    DEFAULT_SKIN_DEPTH,
    MU0,
    CoilSpec,
    circuit_gain,
    mutual_inductance_array,
    orientation_array,
    reference_coils,
)
from .fading import ATOM_TOL, bcs_atom_mass, cdf_bcs, expectation_bcs, fold_orientation
from .learning import LearningConfig

REWARD_MODES = ("expected", "sampled")


def _default_coils():
    return reference_coils()


@dataclass(frozen=True)
class Scenario:
    cell_count: int = 13
    users_per_cell: int = 32
    width: float = 100.0
    height: float = 100.0
    z_west: float = -10.0
    z_east: float = -110.0
    bs_height: float = 2.0
    max_velocity: float = 2.0
    slot_duration: float = 0.1
    avi_update_period: int = 25
    sigma2_max: float = 0.9025
    noise_psd: float = 1e-12
    sinr_threshold: float = 1.0
    rate_compensation: float = 1.0
    power_levels: tuple[float, ...] = (6.2, 7.5, 8.7, 9.9, 11.1)
    bs_coil: CoilSpec = field(default_factory=lambda: _default_coils()[0])
    vu_coil: CoilSpec = field(default_factory=lambda: _default_coils()[1])
    frequency: float = 1e4
    skin_depth: float = DEFAULT_SKIN_DEPTH
    permeability: float = MU0
    cell_side: Optional[float] = None
    cell_centers: Optional[tuple[tuple[float, float], ...]] = None
    learning: LearningConfig = field(default_factory=LearningConfig)
    reward_mode: str = "expected"
    frozen: bool = False

    def __post_init__(self):
        if self.cell_count < 1 or self.users_per_cell < 1:
            raise ValueError("cell_count and users_per_cell must be at least 1")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("area must be positive")
        if self.max_velocity < 0 or not self.slot_duration > 0:
            raise ValueError("max_velocity must be >= 0 and slot_duration > 0")
        if self.avi_update_period < 1:
            raise ValueError("avi_update_period must be a positive integer")
        if not 0.0 < self.sigma2_max <= 1.0:
            raise ValueError("sigma2_max must lie in (0, 1]")
        if not self.noise_psd > 0 or self.sinr_threshold < 0:
            raise ValueError("noise_psd must be positive and sinr_threshold non-negative")
        if not self.rate_compensation >= 1.0:
            raise ValueError("rate_compensation must be >= 1")
        levels = tuple(float(p) for p in self.power_levels)
        object.__setattr__(self, "power_levels", levels)
        if not levels or levels[0] <= 0 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("power levels must be positive and strictly increasing")
        if self.reward_mode not in REWARD_MODES:
            raise ValueError(f"reward_mode must be one of {REWARD_MODES}")
        if self.cell_centers is not None:
            centers = tuple((float(x), float(y)) for x, y in self.cell_centers)
            if len(centers) != self.cell_count:
                raise ValueError("cell_centers must list one centre per cell")
            object.__setattr__(self, "cell_centers", centers)
        side = self.side
        for cx, cy in self.centers:
            if cx - side / 2 < -1e-9 or cx + side / 2 > self.width + 1e-9:
                raise ValueError(f"cell at ({cx}, {cy}) leaves the area")
            if cy - side / 2 < -1e-9 or cy + side / 2 > self.height + 1e-9:
                raise ValueError(f"cell at ({cx}, {cy}) leaves the area")

    @property
    def grid(self) -> int:
        return math.ceil(math.sqrt(self.cell_count))

    @property
    def side(self) -> float:
        if self.cell_side is not None:
            return float(self.cell_side)
        return min(self.width, self.height) / self.grid

    @property
    def centers(self) -> tuple[tuple[float, float], ...]:
        if self.cell_centers is not None:
            return self.cell_centers
        return cell_layout(self.cell_count, self.side, self.grid)

    @property
    def road_gradient(self) -> float:
        return math.atan2(self.z_west - self.z_east, self.width)

    def depth(self, x):
        return self.z_west + (self.z_east - self.z_west) * np.asarray(x, dtype=float) / self.width


def cell_layout(cell_count: int, side: float, grid: int) -> tuple[tuple[float, float], ...]:
    """Square cells on a ``grid x grid`` lattice, filled column by column from the west."""
    out = []
    for k in range(cell_count):
        col, row = divmod(k, grid)
        out.append(((col + 0.5) * side, (row + 0.5) * side))
    return tuple(out)


@dataclass
class VehicleUser:
    cell: int
    index: int
    position: np.ndarray
    velocity: np.ndarray
    sigma2: float

    @property
    def channel(self) -> int:
        return self.index


@dataclass
class CellState:
    bs_position: np.ndarray
    channel: int = 0
    power_index: int = 0
    connected: int = 0


@dataclass
class World:
    """Mutable network state: user arrays of shape ``(K, N, ...)``."""

    scenario: Scenario
    positions: np.ndarray  # (K, N, 3)
    velocities: np.ndarray  # (K, N, 2)
    sigma2: np.ndarray  # (K, N)
    step: int = 0

    def users(self) -> list[VehicleUser]:
        K, N = self.sigma2.shape
        return [
            VehicleUser(k, n, self.positions[k, n].copy(), self.velocities[k, n].copy(), float(self.sigma2[k, n]))
            for k in range(K)
            for n in range(N)
        ]

    def copy(self) -> "World":
        return World(self.scenario, self.positions.copy(), self.velocities.copy(), self.sigma2.copy(), self.step)


def bs_positions(scenario: Scenario) -> np.ndarray:
    c = np.array(scenario.centers, dtype=float)
    z = scenario.depth(c[:, 0]) + scenario.bs_height
    return np.column_stack([c, z])


def cell_states(scenario: Scenario) -> list[CellState]:
    return [CellState(p) for p in bs_positions(scenario)]


def cell_bounds(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    c = np.array(scenario.centers, dtype=float)
    half = scenario.side / 2
    return c - half, c + half


def draw_sigma2(scenario: Scenario, rng: np.random.Generator, shape) -> np.ndarray:
    # uniform on (0, sigma2_max]
    return scenario.sigma2_max * (1.0 - rng.random(shape))


def place_users(scenario: Scenario, seed) -> World:
    """Uniform positions given exactly ``N`` users per cell (a conditioned Poisson process)."""
    rng = np.random.default_rng(seed)
    K, N = scenario.cell_count, scenario.users_per_cell
    lo, hi = cell_bounds(scenario)
    xy = lo[:, None, :] + (hi - lo)[:, None, :] * rng.random((K, N, 2))
    pos = np.concatenate([xy, scenario.depth(xy[..., 0])[..., None]], axis=-1)
    return World(scenario, pos, np.zeros((K, N, 2)), draw_sigma2(scenario, rng, (K, N)))


def _reflect(v, lo, hi):
    span = hi - lo
    r = np.mod(v - lo, 2.0 * span)
    return lo + np.where(r > span, 2.0 * span - r, r)


def step_mobility(world: World, dt: float, rng: np.random.Generator) -> World:
    """Advance one slot of reflected random walk; resample AVIs on the update period."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    sc = world.scenario
    K, N = world.sigma2.shape
    angle = rng.uniform(0.0, 2.0 * math.pi, (K, N))
    speed = rng.uniform(0.0, sc.max_velocity, (K, N)) if sc.max_velocity > 0 else np.zeros((K, N))
    vel = np.stack([speed * np.cos(angle), speed * np.sin(angle)], axis=-1)
    lo, hi = cell_bounds(sc)
    xy = world.positions[..., :2] + dt * vel
    xy = _reflect(xy, lo[:, None, :], hi[:, None, :])
    pos = np.concatenate([xy, sc.depth(xy[..., 0])[..., None]], axis=-1)
    step = world.step + 1
    sigma2 = world.sigma2
    if step % sc.avi_update_period == 0:
        sigma2 = draw_sigma2(sc, rng, (K, N))
    return World(sc, pos, vel, sigma2, step)


def contained(world: World, tol: float = 1e-9) -> bool:
    sc = world.scenario
    lo, hi = cell_bounds(sc)
    xy = world.positions[..., :2]
    inside = np.all(xy >= lo[:, None, :] - tol) and np.all(xy <= hi[:, None, :] + tol)
    on_road = np.allclose(world.positions[..., 2], sc.depth(xy[..., 0]), atol=1e-9)
    return bool(inside and on_road and np.all((world.sigma2 > 0) & (world.sigma2 <= sc.sigma2_max)))


@dataclass(frozen=True)
class LinkTables:
    """``[i, k, n]``: base station ``i`` to user ``n`` of cell ``k``."""

    gain: np.ndarray
    orientation: np.ndarray
    expected_fading: np.ndarray
    sigma2: np.ndarray  # (K, N), of the receiving users


def link_tables(world: World) -> LinkTables:
    sc = world.scenario
    bs = bs_positions(sc)
    rel = world.positions[None, :, :, :] - bs[:, None, None, :]
    g_co = circuit_gain(sc.bs_coil, sc.vu_coil, sc.frequency, sc.permeability)
    m = mutual_inductance_array(sc.bs_coil, sc.vu_coil, rel, sc.skin_depth, sc.permeability)
    phi = orientation_array(rel, sc.road_gradient)
    ej = expectation_bcs(phi, np.broadcast_to(world.sigma2[None], phi.shape))
    return LinkTables(g_co * m * m, phi, np.asarray(ej), world.sigma2)


@dataclass(frozen=True)
class Evaluation:
    sinr: np.ndarray  # (K,) on each cell's allocated channel
    outage: np.ndarray
    utility: np.ndarray
    connected: np.ndarray
    bound: np.ndarray  # no-interference utility under the same action


def _outage(arg, phi, sigma2):
    # strict inequality: the atom sitting exactly at the argument is excluded
    arg = np.asarray(arg, dtype=float)
    inside = arg < 1.0
    a = np.where(inside, arg, 0.5)
    value = np.asarray(cdf_bcs(a, phi, sigma2), dtype=float)
    s = np.sin(np.asarray(fold_orientation(phi))) ** 2
    value = np.where(np.abs(a - s) <= ATOM_TOL, value - bcs_atom_mass(sigma2), value)
    return np.where(inside, np.clip(value, 0.0, 1.0), 1.0)


def sinr_terms(sc: Scenario, tables: LinkTables, channels, powers):
    """Signal and interference on each cell's allocated channel."""
    channels = np.asarray(channels, dtype=int)
    powers = np.asarray(powers, dtype=float)
    K = len(channels)
    k = np.arange(K)
    g = tables.gain[:, k, channels]  # [i, k]
    ej = tables.expected_fading[:, k, channels]
    same = channels[:, None] == channels[None, :]
    np.fill_diagonal(same, False)
    interference = np.sum(same * powers[:, None] * g * ej, axis=0)
    return powers * g[k, k], ej[k, k], interference


def spectral_efficiency(sc: Scenario, sinr, outage):
    sinr = np.asarray(sinr, dtype=float)
    outage = np.asarray(outage, dtype=float)
    if np.any(sinr < 0) or np.any((outage < 0) | (outage > 1)):
        raise ValueError("need sinr >= 0 and outage in [0, 1]")
    value = (1.0 - outage) / sc.rate_compensation * np.log2(1.0 + sinr)
    return float(value) if value.ndim == 0 else value


def evaluate(sc: Scenario, tables: LinkTables, channels, powers, fading=None) -> Evaluation:
    """SINR, outage, utility and connection count of every cell.

    ``fading`` optionally replaces the mean fading of each serving link by a
    sampled gain (the sampled-reward mode); interference always uses means.
    """
    channels = np.asarray(channels, dtype=int)
    k = np.arange(len(channels))
    signal, ej, interference = sinr_terms(sc, tables, channels, powers)
    j = ej if fading is None else np.asarray(fading, dtype=float)
    phi = tables.orientation[k, k, channels]
    sig2 = tables.sigma2[k, channels]
    with np.errstate(divide="ignore"):
        arg = np.where(signal > 0, sc.sinr_threshold * (sc.noise_psd + interference) / signal, np.inf)
        arg0 = np.where(signal > 0, sc.sinr_threshold * sc.noise_psd / signal, np.inf)
    both = _outage(np.concatenate([arg, arg0]), np.tile(phi, 2), np.tile(sig2, 2))
    out, out0 = both[: len(k)], both[len(k):]
    sinr = signal * j / (sc.noise_psd + interference)
    sinr0 = signal * j / sc.noise_psd
    util = spectral_efficiency(sc, sinr, out)
    bound = spectral_efficiency(sc, sinr0, out0)
    connected = (sinr > sc.sinr_threshold).astype(int)
    return Evaluation(sinr, out, np.atleast_1d(util), connected, np.atleast_1d(bound))


def sinr(sc: Scenario, tables: LinkTables, channels, powers, k: int, n: int) -> float:
    """SINR of user ``n`` in cell ``k``; zero unless cell ``k`` serves channel ``n``."""
    if channels[k] != n:
        return 0.0
    return float(evaluate(sc, tables, channels, powers).sinr[k])


def link_outage(sc: Scenario, tables: LinkTables, channels, powers, k: int) -> float:
    return float(evaluate(sc, tables, channels, powers).outage[k])


def cell_utility(sc: Scenario, tables: LinkTables, channels, powers, k: int) -> float:
    """Sum of the spectral efficiencies of the users of cell ``k``.

    Only the served channel carries signal, so every other user adds zero.
    """
    return float(evaluate(sc, tables, channels, powers).utility[k])


def connected_count(sc: Scenario, tables: LinkTables, channels, powers, k: int) -> int:
    return int(evaluate(sc, tables, channels, powers).connected[k])


def no_interference_utility(sc: Scenario, tables: LinkTables, channels, powers) -> np.ndarray:
    return evaluate(sc, tables, channels, powers).bound


def per_user_efficiency(sc: Scenario, tables: LinkTables, channels, powers, k: int) -> np.ndarray:
    """Spectral efficiency of each of cell ``k``'s users under the current allocation."""
    ev = evaluate(sc, tables, channels, powers)
    out = np.zeros(tables.gain.shape[2])
    out[int(channels[k])] = ev.utility[k]
    return out


def with_overrides(sc: Scenario, **kw) -> Scenario:
    return replace(sc, **kw)


def fixed_world(sc: Scenario, positions: Sequence, sigma2) -> World:
    """World with explicit user coordinates ``(K, N, 2)``; depth follows the road."""
    xy = np.asarray(positions, dtype=float).reshape(sc.cell_count, sc.users_per_cell, 2)
    pos = np.concatenate([xy, sc.depth(xy[..., 0])[..., None]], axis=-1)
    s2 = np.broadcast_to(np.asarray(sigma2, dtype=float), (sc.cell_count, sc.users_per_cell)).copy()
    world = World(sc, pos, np.zeros_like(xy), s2)
    if not contained(world):
        raise ValueError("fixed users must lie inside their cells with sigma2 in (0, sigma2_max]")
    return world
