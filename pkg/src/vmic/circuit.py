"""Coil circuit quantities and near-field geometry of a BS -> vehicle MI link.

All functions are pure. Angles are radians, lengths metres, SI units
throughout. The transmitter (base station) coil sits horizontally at the
origin; receiver positions are given relative to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MU0 = 4e-7 * math.pi
"""Free-space permeability (H/m)."""

# lossless-medium default; the skin depth is a scenario parameter
DEFAULT_SKIN_DEPTH = 1e6


@dataclass(frozen=True)
class CoilSpec:
    """Electrical and geometric parameters of one coil antenna."""

    turns: int
    radius: float
    wire_resistivity: float
    load_resistance: float
    resonance_frequency: float

    def __post_init__(self):
        if int(self.turns) != self.turns or self.turns < 1:
            raise ValueError(f"turns must be a positive integer, got {self.turns!r}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        if not self.wire_resistivity > 0:
            raise ValueError(f"wire_resistivity must be positive, got {self.wire_resistivity!r}")
        if not self.load_resistance >= 0:
            raise ValueError(f"load_resistance must be non-negative, got {self.load_resistance!r}")
        if not self.resonance_frequency > 0:
            raise ValueError(
                f"resonance_frequency must be positive, got {self.resonance_frequency!r}"
            )


@dataclass(frozen=True)
class LinkGeometry:
    """Receiver placement relative to a transmitter at the origin."""

    rx_position: tuple[float, float, float]
    road_gradient: float = 0.0
    skin_depth: float = DEFAULT_SKIN_DEPTH

    def __post_init__(self):
        pos = tuple(float(v) for v in self.rx_position)
        if len(pos) != 3:
            raise ValueError("rx_position must have three components")
        object.__setattr__(self, "rx_position", pos)
        if not self.skin_depth > 0:
            raise ValueError(f"skin_depth must be positive, got {self.skin_depth!r}")

    @property
    def distance(self) -> float:
        return math.sqrt(sum(v * v for v in self.rx_position))

    @property
    def zeta(self) -> float:
        x, y, _ = self.rx_position
        return math.hypot(x, y)


@dataclass(frozen=True)
class AlignedChannel:
    circuit_gain: float
    aligned_mutual_inductance: float
    aligned_gain: float
    background_orientation: float


def coil_resistance(spec: CoilSpec) -> float:
    """Wire resistance of the coil, ``2 N pi a rho_w``."""
    return 2.0 * spec.turns * math.pi * spec.radius * spec.wire_resistivity


def coil_inductance(spec: CoilSpec, permeability: float = MU0) -> float:
    return 0.5 * math.pi * spec.turns**2 * spec.radius * permeability


def tuning_capacitance(spec: CoilSpec, permeability: float = MU0) -> float:
    """Series capacitance that resonates the coil at ``spec.resonance_frequency``."""
    w0 = 2.0 * math.pi * spec.resonance_frequency
    return 1.0 / (w0 * w0 * coil_inductance(spec, permeability))


def impedance(spec: CoilSpec, frequency: float, permeability: float = MU0) -> complex:
    """Overall series impedance: coil L and tuning C, coil resistance and load."""
    if not frequency > 0:
        raise ValueError(f"frequency must be positive, got {frequency!r}")
    w = 2.0 * math.pi * frequency
    L = coil_inductance(spec, permeability)
    C = tuning_capacitance(spec, permeability)
    return complex(coil_resistance(spec) + spec.load_resistance, w * L - 1.0 / (w * C))


def circuit_gain(
    tx: CoilSpec, rx: CoilSpec, frequency: float, permeability: float = MU0
) -> float:
    """Electrical factor of the channel power gain, ``|w^2 R_L / (Z_rx^2 Z_tx)|``.

    The load in the numerator is the receiver's load resistance.
    """
    w = 2.0 * math.pi * frequency
    z_tx = impedance(tx, frequency, permeability)
    z_rx = impedance(rx, frequency, permeability)
    return abs(w * w * rx.load_resistance / (z_rx * z_rx * z_tx))


def _check_nonzero(d):
    if np.any(d == 0):
        raise ValueError("receiver coincides with the transmitter (distance 0)")


def _angular_terms(rel):
    rel = np.asarray(rel, dtype=float)
    x, y, z = rel[..., 0], rel[..., 1], rel[..., 2]
    zeta2 = x * x + y * y
    d2 = zeta2 + z * z
    axial = 2.0 * z * z - zeta2
    cross2 = 9.0 * zeta2 * z * z
    return axial, cross2, zeta2, d2


def magnetic_field(tx: CoilSpec, geometry: LinkGeometry, current: float) -> np.ndarray:
    """Field of the horizontal transmitter coil at the receiver, as a 2-vector.

    Components follow the coil's own frame in the (zeta, z) plane: the first
    carries ``(2 z^2 - zeta^2) / d^2``, the second ``3 zeta z / d^2``.
    """
    d = geometry.distance
    _check_nonzero(d)
    _, _, z = geometry.rx_position
    zeta = geometry.zeta
    scale = tx.turns * current * tx.radius**2 / (4.0 * d**3 * math.exp(d / geometry.skin_depth))
    return scale * np.array([(2 * z * z - zeta * zeta) / d**2, 3 * zeta * z / d**2])


def mutual_inductance_array(
    tx: CoilSpec,
    rx: CoilSpec,
    rel: np.ndarray,
    skin_depth: float = DEFAULT_SKIN_DEPTH,
    permeability: float = MU0,
) -> np.ndarray:
    """Aligned mutual inductance for an array of relative positions ``(..., 3)``."""
    axial, cross2, _, d2 = _angular_terms(rel)
    _check_nonzero(d2)
    d = np.sqrt(d2)
    k = math.pi * permeability * rx.turns * tx.turns * rx.radius**2 * tx.radius**2 / 4.0
    return k * np.exp(-d / skin_depth) * np.sqrt(axial * axial + cross2) / d**5


def orientation_array(rel: np.ndarray, road_gradient=0.0) -> np.ndarray:
    """Antenna background orientation for an array of relative positions."""
    axial, cross2, _, d2 = _angular_terms(rel)
    _check_nonzero(d2)
    # atan2 rather than arccos of the cosine: arccos is ill-conditioned near 0 and pi
    return np.arctan2(np.sqrt(cross2), axial) + road_gradient


def aligned_mutual_inductance(
    tx: CoilSpec, rx: CoilSpec, geometry: LinkGeometry, permeability: float = MU0
) -> float:
    return float(
        mutual_inductance_array(
            tx, rx, np.array(geometry.rx_position), geometry.skin_depth, permeability
        )
    )


def background_orientation(geometry: LinkGeometry) -> float:
    """Angle between the field and the (road-tilted) receiver coil normal."""
    return float(orientation_array(np.array(geometry.rx_position), geometry.road_gradient))


def aligned_channel(
    tx: CoilSpec,
    rx: CoilSpec,
    geometry: LinkGeometry,
    frequency: float,
    permeability: float = MU0,
) -> AlignedChannel:
    g_co = circuit_gain(tx, rx, frequency, permeability)
    m = aligned_mutual_inductance(tx, rx, geometry, permeability)
    return AlignedChannel(
        circuit_gain=g_co,
        aligned_mutual_inductance=m,
        aligned_gain=g_co * m * m,
        background_orientation=background_orientation(geometry),
    )


def reference_coils(rho_w: float = 0.0166, f0: float = 1e4) -> tuple[CoilSpec, CoilSpec]:
    """(BS coil, vehicle coil) of the reference evaluation setup.

    Both circuits carry ``R_L`` equal to the vehicle coil's wire resistance.
    """
    r_load = 2.0 * 30 * math.pi * 0.4 * rho_w
    bs = CoilSpec(15, 0.6, rho_w, r_load, f0)
    vu = CoilSpec(30, 0.4, rho_w, r_load, f0)
    return bs, vu
