"""Statistics of the MI polarization (fast-fading) gain ``J = cos^2(theta + phi)``.

``Y = sin(theta)`` is the normalized vibration offset and ``X = Y**2`` the
vibration intensity. Two routes are provided for the CDF, PDF and mean of
``J``: a general one driven by any :class:`BoundaryDistribution` (integrals by
adaptive quadrature) and an erf closed form for the boundary central
chi-square law parameterised by the average AVI ``sigma2``.

The CDFs returned here are right-continuous, ``P[J <= z]``. The boundary atom
of the AVI becomes a jump of size ``atom_mass`` at ``z = sin^2(phi)``.
Densities are always returned together with the atom mass at ``z`` and the
Dirac term is never materialised as a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .vibration import BcsDistribution, BoundaryDistribution

HALF_PI = 0.5 * math.pi
ATOM_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class PdfValue(NamedTuple):
    density: float | np.ndarray
    atom: float | np.ndarray


def _out(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


def fold_orientation(phi):
    """Map ``phi`` into ``[0, pi/2]``.

    ``J`` depends on ``phi`` only modulo ``pi``, and an even vibration law
    makes ``phi`` and ``pi - phi`` indistinguishable, so every statistic can
    be evaluated on the folded angle. Values already in range pass through
    bit-for-bit.
    """
    phi = np.asarray(phi, dtype=float)
    inside = (phi >= 0.0) & (phi <= HALF_PI)
    folded = np.mod(np.abs(phi), math.pi)
    folded = np.where(folded > HALF_PI, math.pi - folded, folded)
    return _out(np.where(inside, phi, folded))


def _trig(phi):
    c = np.cos(phi)
    s = np.sin(phi)
    return c * c, s * s, np.cos(2.0 * phi), np.abs(np.sin(2.0 * phi))


def polarization_gain(y, phi):
    """``J`` for offset ``y in [-1, 1]`` and background orientation ``phi``."""
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) > 1.0) or np.any(np.isnan(y)):
        raise DomainError("vibration offset must satisfy |y| <= 1")
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    y2 = y * y
    j = c * c * (1.0 - y2) + s * s * y2 - 2.0 * c * s * y * np.sqrt(1.0 - y2)
    return _out(np.clip(j, 0.0, 1.0))


def conjugate_branches(x, phi):
    """``(J_plus, J_minus)``: the gain at ``Y = +sqrt(x)`` and ``Y = -sqrt(x)``."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)) or np.any(np.isnan(x)):
        raise DomainError("vibration intensity must lie in [0, 1]")
    r = np.sqrt(x)
    return polarization_gain(r, phi), polarization_gain(-r, phi)


def stationary_points(phi: float) -> tuple[float, float]:
    """Offsets ``(Y*_-, Y*_+)`` where ``dJ/dY = 0`` on ``[-1, 1]``.

    For ``phi`` in ``[0, pi/2]`` (mod ``pi``) these are ``(-sin phi, cos phi)``
    with ``J = 1`` at the first and ``J = 0`` at the second; on
    ``(-pi/2, 0)`` the roles swap. At the degenerate angles the returned set
    contains the boundary offset (``phi = 0`` gives ``(0, 1)``).
    """
    p = math.remainder(phi, math.pi)  # (-pi/2, pi/2]
    if p >= 0.0:
        return -math.sin(p), math.cos(p)
    return -math.cos(p), -math.sin(p)


def _roots_unchecked(z, phi):
    c, _, c2, s2abs = _trig(phi)
    base = c - z * c2
    spread = s2abs * np.sqrt(np.clip(z * (1.0 - z), 0.0, None))
    return np.clip(base - spread, 0.0, 1.0), np.clip(base + spread, 0.0, 1.0)


def roots(z, phi):
    """Intensities ``(X_L, X_H)`` at which the gain equals ``z``, clamped to [0, 1]."""
    z = np.asarray(z, dtype=float)
    if np.any((z < 0.0) | (z > 1.0)) or np.any(np.isnan(z)):
        raise DomainError("gain level must lie in [0, 1]")
    xl, xh = _roots_unchecked(z, np.asarray(phi, dtype=float))
    return _out(xl), _out(xh)


def _root_derivatives_unchecked(z, phi):
    _, _, c2, s2abs = _trig(phi)
    slope = s2abs * (1.0 - 2.0 * z) / (2.0 * np.sqrt(z * (1.0 - z)))
    return -c2 - slope, -c2 + slope


def root_derivatives(z, phi):
    """``(dX_L/dz, dX_H/dz)`` on the open interval; both diverge at 0 and 1."""
    z = np.asarray(z, dtype=float)
    if np.any((z <= 0.0) | (z >= 1.0)) or np.any(np.isnan(z)):
        raise DomainError("root derivatives are defined for 0 < z < 1 only")
    dl, dh = _root_derivatives_unchecked(z, np.asarray(phi, dtype=float))
    return _out(dl), _out(dh)


# -- general boundary p(x) law -------------------------------------------------


def cdf_general(z, phi, vib: BoundaryDistribution):
    """``P[J <= z]`` for an AVI law given by its density and boundary atom."""
    if np.ndim(z) > 0:
        return np.array([cdf_general(float(v), phi, vib) for v in np.ravel(z)]).reshape(np.shape(z))
    z = float(z)
    if z >= 1.0:
        return 1.0
    if z < 0.0:
        return 0.0
    phi = fold_orientation(phi)
    c, s, _, _ = _trig(phi)
    xl, xh = (float(v) for v in _roots_unchecked(z, phi))
    if z >= max(c, s):
        value = 1.0 - 0.5 * vib.integral(xl, xh)
    elif z < min(c, s):
        value = 0.5 * vib.integral(xl, xh)
    elif c < s:
        value = 0.5 * (vib.integral(0.0, xl) + vib.integral(0.0, xh))
    else:
        value = 1.0 - 0.5 * (vib.integral(0.0, xl) + vib.integral(0.0, xh))
    return min(max(value, 0.0), 1.0)


def _atom_at(z, phi, mass):
    s = np.sin(fold_orientation(phi)) ** 2
    return np.where(np.abs(np.asarray(z, dtype=float) - s) <= ATOM_TOL, mass, 0.0)


def pdf_general(z, phi, vib: BoundaryDistribution) -> PdfValue:
    """Continuous density of ``J`` at ``z`` and the probability atom located at ``z``."""
    if np.ndim(z) > 0:
        vals = [pdf_general(float(v), phi, vib) for v in np.ravel(z)]
        shape = np.shape(z)
        return PdfValue(
            np.array([v.density for v in vals]).reshape(shape),
            np.array([v.atom for v in vals]).reshape(shape),
        )
    z = float(z)
    if z in (0.0, 1.0):
        raise DomainError("the density of J diverges at z = 0 and z = 1")
    atom = float(_atom_at(z, phi, vib.atom_mass))
    if z < 0.0 or z > 1.0:
        return PdfValue(0.0, 0.0)
    phi = fold_orientation(phi)
    xl, xh = (float(v) for v in _roots_unchecked(z, phi))
    dl, dh = (float(v) for v in _root_derivatives_unchecked(z, phi))
    density = 0.5 * (abs(dl) * vib.density(xl) + abs(dh) * vib.density(xh))
    return PdfValue(density, atom)


def expectation_general(phi, vib: BoundaryDistribution) -> float:
    phi = fold_orientation(phi)
    _, s, c2, _ = _trig(phi)
    return float(c2 * vib.mass - c2 * vib.first_moment + s)


# -- boundary central chi-square closed forms ----------------------------------


def _check_sigma2(sigma2):
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(sigma2 < 0.0) or np.any(np.isnan(sigma2)):
        raise DomainError("average AVI must be non-negative")
    return sigma2


def bcs_atom_mass(sigma2):
    """Probability of the boundary event, ``1 - erf(sqrt(1 / (2 sigma2)))``."""
    sigma2 = _check_sigma2(sigma2)
    with np.errstate(divide="ignore"):
        return _out(special.erfc(np.sqrt(1.0 / (2.0 * sigma2))))


def cdf_bcs(z, phi, sigma2):
    """Closed-form ``P[J <= z]`` under the BCS law; broadcasts over all arguments.

    ``sigma2 == 0`` is the vibration-free case: a unit step at ``cos^2(phi)``.
    """
    sigma2 = _check_sigma2(sigma2)
    z = np.asarray(z, dtype=float)
    phi = np.asarray(fold_orientation(phi), dtype=float)
    z, phi, sigma2 = np.broadcast_arrays(z, phi, sigma2)
    c, s, _, _ = _trig(phi)
    zc = np.clip(z, 0.0, 1.0)
    xl, xh = _roots_unchecked(zc, phi)
    safe = np.where(sigma2 > 0.0, sigma2, 1.0)
    el = special.erf(np.sqrt(xl / (2.0 * safe)))
    eh = special.erf(np.sqrt(xh / (2.0 * safe)))
    lo, hi = np.minimum(c, s), np.maximum(c, s)
    middle = np.where(c < s, 0.5 * (eh + el), 1.0 - 0.5 * (eh + el))
    value = np.select(
        [z >= 1.0, z < 0.0, zc >= hi, zc < lo],
        [1.0, 0.0, 1.0 - 0.5 * (eh - el), 0.5 * (eh - el)],
        default=middle,
    )
    step = np.where(z >= c, 1.0, 0.0)
    value = np.where(sigma2 > 0.0, value, np.where(z >= 1.0, 1.0, step))
    return _out(np.clip(value, 0.0, 1.0))


def _bcs_branch_term(x, dx, sigma2, cs):
    # |X'| p(X); at X = 0 the root and its slope vanish together (z = cos^2 phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        regular = np.abs(dx) * np.exp(-x / (2.0 * sigma2)) / np.sqrt(2.0 * math.pi * sigma2 * x)
        limit = np.sqrt(1.0 / (2.0 * math.pi * sigma2 * cs))
    return np.where(x > 0.0, regular, limit)


def pdf_bcs(z, phi, sigma2) -> PdfValue:
    """Closed-form density of ``J`` and the atom at ``z`` under the BCS law."""
    sigma2 = _check_sigma2(sigma2)
    z = np.asarray(z, dtype=float)
    if np.any((z == 0.0) | (z == 1.0)):
        raise DomainError("the density of J diverges at z = 0 and z = 1")
    phi = np.asarray(fold_orientation(phi), dtype=float)
    z, phi, sigma2 = np.broadcast_arrays(z, phi, sigma2)
    c, s, _, _ = _trig(phi)
    inside = (z > 0.0) & (z < 1.0)
    zi = np.where(inside, z, 0.5)
    safe = np.where(sigma2 > 0.0, sigma2, 1.0)
    xl, xh = _roots_unchecked(zi, phi)
    dl, dh = _root_derivatives_unchecked(zi, phi)
    cs = c * s
    dens = 0.5 * (_bcs_branch_term(xl, dl, safe, cs) + _bcs_branch_term(xh, dh, safe, cs))
    dens = np.where(inside & (sigma2 > 0.0), dens, 0.0)
    with np.errstate(divide="ignore"):
        mass = special.erfc(np.sqrt(1.0 / (2.0 * safe)))
    atom = np.where(np.abs(z - s) <= ATOM_TOL, mass, 0.0)
    det_atom = np.where(np.abs(z - c) <= ATOM_TOL, 1.0, 0.0)
    atom = np.where(sigma2 > 0.0, atom, det_atom)
    return PdfValue(_out(dens), _out(atom))


def expectation_bcs(phi, sigma2):
    """Mean fast-fading gain under the BCS law; ``cos^2(phi)`` at ``sigma2 == 0``."""
    sigma2 = _check_sigma2(sigma2)
    phi = np.asarray(fold_orientation(phi), dtype=float)
    c, s, c2, _ = _trig(phi)
    safe = np.where(sigma2 > 0.0, sigma2, 1.0)
    e = special.erf(np.sqrt(1.0 / (2.0 * safe)))
    tail = np.sqrt(2.0 * safe / math.pi) * np.exp(-1.0 / (2.0 * safe))
    value = (c2 - safe * c2) * e + tail * c2 + s
    return _out(np.where(sigma2 > 0.0, value, c))


# -- dispatch and outage -------------------------------------------------------


def fading_cdf(z, phi, vib: BoundaryDistribution):
    """CDF of ``J``, using the closed form when the law is BCS."""
    if isinstance(vib, BcsDistribution):
        return cdf_bcs(z, phi, vib.sigma2)
    return cdf_general(z, phi, vib)


def fading_expectation(phi, vib: BoundaryDistribution) -> float:
    if isinstance(vib, BcsDistribution):
        return float(expectation_bcs(phi, vib.sigma2))
    return expectation_general(phi, vib)


@dataclass(frozen=True)
class FadingLaw:
    """Law of the fast-fading gain at one receiver location."""

    background_orientation: float
    vibration: BoundaryDistribution

    @property
    def atom_location(self) -> float:
        return math.sin(fold_orientation(self.background_orientation)) ** 2

    @property
    def atom_mass(self) -> float:
        if isinstance(self.vibration, BcsDistribution):
            return float(bcs_atom_mass(self.vibration.sigma2))
        return self.vibration.atom_mass

    def cdf(self, z):
        return fading_cdf(z, self.background_orientation, self.vibration)

    def pdf(self, z) -> PdfValue:
        if isinstance(self.vibration, BcsDistribution):
            return pdf_bcs(z, self.background_orientation, self.vibration.sigma2)
        return pdf_general(z, self.background_orientation, self.vibration)

    def expectation(self) -> float:
        return fading_expectation(self.background_orientation, self.vibration)


@dataclass(frozen=True)
class LinkBudget:
    """Deterministic part of an SINR: PSDs and aligned gains.

    ``interferers`` holds ``(psd, aligned_gain, expected_fading)`` triples;
    interference enters through its mean fading as a deterministic term.
    """

    tx_psd: float
    aligned_gain: float
    noise_psd: float
    interferers: Sequence[tuple[float, float, float]] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "interferers", tuple(tuple(map(float, t)) for t in self.interferers))
        if not self.noise_psd > 0:
            raise ValueError("noise PSD must be positive")
        if self.tx_psd < 0 or self.aligned_gain < 0:
            raise ValueError("transmit PSD and aligned gain must be non-negative")
        for psd, gain, ej in self.interferers:
            if psd < 0 or gain < 0 or not 0.0 <= ej <= 1.0:
                raise ValueError(f"invalid interferer {(psd, gain, ej)}")

    @property
    def interference(self) -> float:
        return sum(psd * gain * ej for psd, gain, ej in self.interferers)


def outage_argument(budget: LinkBudget, threshold: float) -> float:
    """Gain level below which the instantaneous SINR misses ``threshold``."""
    signal = budget.tx_psd * budget.aligned_gain
    if signal <= 0.0:
        return math.inf
    return max(threshold, 0.0) * (budget.noise_psd + budget.interference) / signal


def outage_probability(
    budget: LinkBudget, phi: float, vib: BoundaryDistribution, threshold: float
) -> float:
    """``P[SINR < threshold]``.

    A zero transmit PSD or aligned gain yields outage 1. The inequality is
    strict, so the atom is excluded when the argument sits exactly on it.
    """
    arg = outage_argument(budget, threshold)
    if arg >= 1.0:
        return 1.0
    law = FadingLaw(phi, vib)
    value = float(law.cdf(arg))
    if abs(arg - law.atom_location) <= ATOM_TOL:
        value -= law.atom_mass
    return min(max(value, 0.0), 1.0)

