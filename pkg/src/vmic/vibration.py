"""Boundary-constrained laws of the antenna vibration intensity (AVI).

The AVI ``X = Y**2`` lives on ``[0, 1]``: a density ``p`` on the open
interval plus a point mass at ``X = 1`` collecting every vibration that hits
the mechanical limit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

QUAD_TOL = 1e-10
MASS_TOL = 1e-9


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


def integrate_density(p: Callable[[float], float], a: float, b: float, tol: float = QUAD_TOL) -> float:
    """``int_a^b p(x) dx`` on ``[0, 1]`` via the substitution ``x = u**2``.

    The substitution absorbs ``1/sqrt(x)`` singularities at the origin,
    which the chi-square type densities all have.
    """
    if b <= a:
        return 0.0
    lo, hi = math.sqrt(max(a, 0.0)), math.sqrt(min(b, 1.0))
    if hi <= lo:
        return 0.0

    def f(u):
        return 2.0 * u * p(u * u)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature over [{a}, {b}] failed: {exc}") from exc
    if not math.isfinite(value):
        raise QuadratureError(f"non-finite integral over [{a}, {b}]")
    return value


@dataclass(frozen=True)
class BoundaryDistribution:
    """Density ``p`` on ``(0, 1)`` with the leftover mass as an atom at 1.

    ``inverse_cdf`` optionally maps ``u in [0, mass)`` to the AVI quantile;
    the Monte-Carlo oracle uses it to draw samples.
    """

    density: Callable[[float], float]
    inverse_cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "p"

    def __post_init__(self):
        grid = np.linspace(0.0, 1.0, 257)[1:-1]
        vals = np.array([self.density(float(x)) for x in grid])
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError(f"density {self.name} must be finite and non-negative on (0, 1)")
        if self.mass > 1.0 + MASS_TOL:
            raise ValueError(f"density {self.name} integrates to {self.mass} > 1")

    @cached_property
    def mass(self) -> float:
        """``int_0^1 p``."""
        return integrate_density(self.density, 0.0, 1.0)

    @cached_property
    def first_moment(self) -> float:
        return integrate_density(lambda x: x * self.density(x), 0.0, 1.0)

    @property
    def atom_mass(self) -> float:
        return min(max(1.0 - self.mass, 0.0), 1.0)

    def integral(self, a: float, b: float) -> float:
        return integrate_density(self.density, a, b)


@dataclass(frozen=True)
class BcsDistribution(BoundaryDistribution):
    """Boundary central chi-square: ``X = Y**2`` with ``Y ~ N(0, sigma2)`` clamped to ``[-1, 1]``."""

    sigma2: float = 1.0

    def total_atom(self) -> float:
        return float(1.0 - special.erf(math.sqrt(1.0 / (2.0 * self.sigma2))))


def bcs_density(sigma2: float) -> Callable[[float], float]:
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma2)

    def p(x):
        if x <= 0.0:
            return math.inf
        return norm * math.exp(-x / (2.0 * sigma2)) / math.sqrt(x)

    return p


def bcs_distribution(sigma2: float) -> BcsDistribution:
    if not sigma2 > 0:
        raise ValueError(f"average AVI must be positive, got {sigma2!r}")

    def inverse(u):
        return 2.0 * sigma2 * special.erfinv(np.asarray(u, dtype=float)) ** 2

    return BcsDistribution(
        density=bcs_density(sigma2), inverse_cdf=inverse, name=f"bcs({sigma2:g})", sigma2=sigma2
    )


def uniform_distribution(height: float) -> BoundaryDistribution:
    """Constant density ``height`` on ``(0, 1)``; the atom at 1 takes ``1 - height``."""
    if not 0.0 <= height <= 1.0:
        raise ValueError("uniform density height must lie in [0, 1]")
    return BoundaryDistribution(
        density=lambda x: height,
        inverse_cdf=lambda u: np.asarray(u, dtype=float) / height,
        name=f"uniform({height:g})",
    )
