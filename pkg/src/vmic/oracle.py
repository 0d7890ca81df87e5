"""Brute-force Monte-Carlo validator for the fast-fading closed forms.

Offsets are drawn from ``N(0, sigma^2)`` and *clamped* to ``[-1, 1]``.
Clamping, not truncation or rejection, is what realises the boundary atom:
every draw beyond the mechanical limit lands exactly on ``|Y| = 1`` and
therefore on ``J = sin^2(phi)``. Truncating would silently delete that mass.

All generators are explicitly seeded numpy ``Generator`` objects (PCG64),
so a (seed, parameters) pair always reproduces the same batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fading import LinkBudget, polarization_gain
from .vibration import BoundaryDistribution


@dataclass(frozen=True)
class SampleBatch:
    offsets: np.ndarray
    gains: np.ndarray
    phi: float
    seed: int | None
    count: int

    def __post_init__(self):
        if self.count < 1 or len(self.offsets) != self.count or len(self.gains) != self.count:
            raise ValueError("batch must be nonempty with matching offsets and gains")


def shard_seed(seed: int, shard: int) -> np.random.SeedSequence:
    """Independent stream for shard ``shard`` of a run seeded with ``seed``."""
    return np.random.SeedSequence(seed, spawn_key=(shard,))


def sample_nvvo(sigma: float, count: int, seed) -> np.ndarray:
    """Gaussian vibration offsets clamped onto the boundary ``|Y| = 1``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    y = sigma * rng.standard_normal(count)
    return np.clip(y, -1.0, 1.0)


def sample_offsets(vib: BoundaryDistribution, count: int, seed) -> np.ndarray:
    """Offsets for a general AVI law through its inverse-CDF hook.

    The intensity takes the boundary value 1 with probability ``atom_mass``
    and the sign of the offset is a fair coin (even offset density).
    """
    if vib.inverse_cdf is None:
        raise ValueError(f"distribution {vib.name} has no inverse_cdf hook")
    rng = np.random.default_rng(seed)
    u = rng.random(count)
    sign = np.where(rng.random(count) < 0.5, -1.0, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        x = np.where(u < vib.mass, vib.inverse_cdf(np.minimum(u, vib.mass)), 1.0)
    return sign * np.sqrt(np.clip(x, 0.0, 1.0))


def make_batch(offsets: np.ndarray, phi: float, seed=None) -> SampleBatch:
    offsets = np.asarray(offsets, dtype=float)
    return SampleBatch(offsets, np.asarray(polarization_gain(offsets, phi)), float(phi), seed, len(offsets))


def sample_batch(sigma: float, phi: float, count: int, seed) -> SampleBatch:
    return make_batch(sample_nvvo(sigma, count, seed), phi, seed)


def sample_batch_sharded(sigma: float, phi: float, count: int, seed: int, shards: int) -> SampleBatch:
    sizes = [count // shards + (1 if i < count % shards else 0) for i in range(shards)]
    parts = [sample_nvvo(sigma, n, shard_seed(seed, i)) for i, n in enumerate(sizes) if n]
    return make_batch(np.concatenate(parts), phi, seed)


def empirical_cdf(batch: SampleBatch, z_grid) -> np.ndarray:
    """Fraction of gains strictly below each ``z``."""
    g = np.sort(batch.gains)
    return np.searchsorted(g, np.asarray(z_grid, dtype=float), side="left") / batch.count


def ks_distance(batch: SampleBatch, cdf: Callable[[np.ndarray], np.ndarray], atom=None) -> float:
    """Kolmogorov-Smirnov statistic ``sup_z |F(z) - F_n(z)|``.

    ``cdf`` must be right-continuous. Both the right limit and the left limit
    are compared at every sample, so jumps of either function are handled.
    The left limit of ``cdf`` is read one ulp below each sample unless
    ``atom``, a ``(location, mass)`` pair, pins it at a known jump.
    """
    g = np.sort(batch.gains)
    n = batch.count
    f_right = np.asarray(cdf(g), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(g, -np.inf)), dtype=float)
    if atom is not None:
        loc, mass = atom
        f_left = np.where(g == loc, f_right - mass, f_left)
    ecdf_right = np.searchsorted(g, g, side="right") / n
    ecdf_left = np.searchsorted(g, g, side="left") / n
    return float(max(np.max(np.abs(ecdf_right - f_right)), np.max(np.abs(ecdf_left - f_left))))


def empirical_expectation(batch: SampleBatch) -> tuple[float, float]:
    """Sample mean of the gains and its standard error."""
    mean = float(np.mean(batch.gains))
    if batch.count < 2:
        return mean, math.inf
    return mean, float(np.std(batch.gains, ddof=1) / math.sqrt(batch.count))


def boundary_fraction(batch: SampleBatch) -> float:
    return float(np.mean(np.abs(batch.offsets) == 1.0))


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def instantaneous_sinr(budget: LinkBudget, gains: np.ndarray) -> np.ndarray:
    return budget.tx_psd * budget.aligned_gain * gains / (budget.noise_psd + budget.interference)


def empirical_outage(
    budget: LinkBudget, phi: float, sigma: float, threshold: float, count: int, seed
) -> float:
    """Fraction of sampled instantaneous SINRs strictly below ``threshold``."""
    batch = sample_batch(sigma, phi, count, seed)
    return float(np.mean(instantaneous_sinr(budget, batch.gains) < threshold))


def outage_sweep_empirical(
    budget: LinkBudget, phi: float, sigma: float, thresholds: Sequence[float], count: int, seed
) -> np.ndarray:
    batch = sample_batch(sigma, phi, count, seed)
    sinr = instantaneous_sinr(budget, batch.gains)
    return np.array([np.mean(sinr < t) for t in thresholds])
