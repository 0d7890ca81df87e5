import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vmic.circuit import (
    MU0,
    CoilSpec,
    LinkGeometry,
    aligned_channel,
    aligned_mutual_inductance,
    background_orientation,
    circuit_gain,
    coil_inductance,
    coil_resistance,
    impedance,
    magnetic_field,
    reference_coils,
    tuning_capacitance,
)

RHO = 0.0166


def coil(turns, radius, rho=RHO, load=1.0, f0=1e4):
    return CoilSpec(turns, radius, rho, load, f0)


# hand-evaluated reference values (frozen)
def test_resistance_values():
    assert coil_resistance(coil(30, 0.4)) == pytest.approx(1.25161, abs=5e-6)
    assert coil_resistance(coil(15, 0.6)) == pytest.approx(0.93871, abs=5e-6)
    assert coil_resistance(coil(1, 1 / (2 * math.pi), rho=1.0)) == pytest.approx(1.0, rel=1e-15)


def test_inductance_values():
    assert coil_inductance(coil(30, 0.4)) == pytest.approx(7.1061e-4, rel=1e-4)
    # the rounded reference 2.6645e-4 vs exact 2.66479e-4
    assert coil_inductance(coil(15, 0.6)) == pytest.approx(2.66479e-4, rel=1e-5)
    assert coil_inductance(coil(1, 2 / math.pi), permeability=1.0) == pytest.approx(1.0, rel=1e-15)


def test_capacitance_values():
    c = tuning_capacitance(coil(30, 0.4))
    assert c == pytest.approx(1.0 / ((2 * math.pi * 1e4) ** 2 * 0.5 * math.pi * 900 * 0.4 * MU0), rel=1e-14)
    assert c == pytest.approx(3.5643e-7, rel=2e-4)
    spec = coil(1, 2 / math.pi, f0=1 / (2 * math.pi))
    assert tuning_capacitance(spec, permeability=1.0) == pytest.approx(1.0, rel=1e-12)
    assert tuning_capacitance(coil(30, 0.4, f0=2e4)) == pytest.approx(c / 4, rel=1e-14)


def test_spec_validation():
    for bad in [dict(turns=0), dict(turns=2.5), dict(radius=0.0), dict(wire_resistivity=-1.0),
                dict(load_resistance=-0.1), dict(resonance_frequency=0.0)]:
        kw = dict(turns=3, radius=0.1, wire_resistivity=0.1, load_resistance=1.0, resonance_frequency=1e3)
        kw.update(bad)
        with pytest.raises(ValueError):
            CoilSpec(**kw)
    with pytest.raises(ValueError):
        LinkGeometry((1, 2, 3), skin_depth=0.0)
    with pytest.raises(ValueError):
        LinkGeometry((1, 2))


@given(
    turns=st.integers(1, 200),
    radius=st.floats(0.01, 2.0),
    rho=st.floats(1e-4, 1.0),
    load=st.floats(0.0, 10.0),
    f0=st.floats(10.0, 1e6),
)
def test_resonance_cancels_reactance(turns, radius, rho, load, f0):
    spec = CoilSpec(turns, radius, rho, load, f0)
    z = impedance(spec, f0)
    w = 2 * math.pi * f0
    assert abs(z.imag) <= 1e-12 * w * coil_inductance(spec)
    assert z.real == pytest.approx(coil_resistance(spec) + load, rel=1e-15)
    assert coil_resistance(spec) > 0 and coil_inductance(spec) > 0 and tuning_capacitance(spec) > 0


def test_circuit_gain_at_resonance_matches_closed_form():
    bs, vu = reference_coils()
    r_ci, r_cb, r_l = coil_resistance(vu), coil_resistance(bs), vu.load_resistance
    assert r_l == pytest.approx(r_ci)
    expected = (2 * math.pi * 1e4) ** 2 * r_l / ((r_ci + r_l) ** 2 * (r_cb + r_l))
    assert circuit_gain(bs, vu, 1e4) == pytest.approx(expected, rel=1e-12)


def test_circuit_gain_peaks_near_resonance():
    bs, vu = reference_coils()
    g0 = circuit_gain(bs, vu, 1e4)
    grid = 1e4 * np.concatenate([np.linspace(0.5, 0.99, 50), np.linspace(1.01, 1.5, 50)])
    assert all(circuit_gain(bs, vu, f) < g0 for f in grid)
    # the omega^2 factor pushes the exact maximum slightly above f0
    fine = 1e4 * np.linspace(0.999, 1.002, 3001)
    g = np.array([circuit_gain(bs, vu, f) for f in fine])
    peak = fine[np.argmax(g)] / 1e4
    assert 1.0 < peak < 1.0015
    assert g.max() / g0 < 1.001


def test_field_special_points():
    bs, _ = reference_coils()
    scale = bs.turns * 2.0 * bs.radius**2 / (4 * 5.0**3 * math.exp(5.0 / 1e6))
    on_axis = magnetic_field(bs, LinkGeometry((0, 0, 5.0)), 2.0)
    np.testing.assert_allclose(on_axis, scale * np.array([2.0, 0.0]), rtol=1e-14)
    in_plane = magnetic_field(bs, LinkGeometry((3.0, 4.0, 0.0)), 2.0)
    np.testing.assert_allclose(in_plane, scale * np.array([-1.0, 0.0]), rtol=1e-14)
    with pytest.raises(ValueError):
        magnetic_field(bs, LinkGeometry((0, 0, 0)), 1.0)


def _field_direct(n, a, current, x, y, z, delta):
    # independent evaluation of the dipole field expression
    zeta = math.sqrt(x * x + y * y)
    d = math.sqrt(x * x + y * y + z * z)
    pre = n * current * a * a / (4 * d**3) * math.exp(-d / delta)
    return pre * (2 * z * z - zeta * zeta) / d**2, pre * 3 * zeta * z / d**2


def test_mutual_inductance_matches_flux_route():
    bs, vu = reference_coils()
    rng = np.random.default_rng(11)
    for _ in range(100):
        pos = rng.uniform(-20, 20, 3)
        delta = float(rng.uniform(5, 1e3))
        geo = LinkGeometry(tuple(pos), skin_depth=delta)
        current = float(rng.uniform(0.1, 10))
        h = magnetic_field(bs, geo, current)
        np.testing.assert_allclose(h, _field_direct(bs.turns, bs.radius, current, *pos, delta), rtol=1e-12)
        flux = MU0 * math.pi * vu.radius**2 * np.linalg.norm(h) * vu.turns / current
        assert aligned_mutual_inductance(bs, vu, geo) == pytest.approx(flux, rel=1e-10)


def test_mutual_inductance_on_axis():
    bs, vu = reference_coils()
    z = 7.0
    k = math.pi * MU0 * vu.turns * bs.turns * vu.radius**2 * bs.radius**2 / 4
    geo = LinkGeometry((0.0, 0.0, z), skin_depth=50.0)
    assert aligned_mutual_inductance(bs, vu, geo) == pytest.approx(k * math.exp(-z / 50) * 2 / z**3, rel=1e-13)


@given(
    zeta=st.floats(0.1, 30),
    z=st.floats(-30, 30),
    a=st.floats(0, 2 * math.pi),
    b=st.floats(0, 2 * math.pi),
)
def test_axisymmetry(zeta, z, a, b):
    bs, vu = reference_coils()
    g1 = LinkGeometry((zeta * math.cos(a), zeta * math.sin(a), z))
    g2 = LinkGeometry((zeta * math.cos(b), zeta * math.sin(b), z))
    assert aligned_mutual_inductance(bs, vu, g1) == pytest.approx(aligned_mutual_inductance(bs, vu, g2), rel=1e-13)
    assert background_orientation(g1) == pytest.approx(background_orientation(g2), abs=1e-12)


def test_orientation_values():
    assert background_orientation(LinkGeometry((0, 0, 4.0))) == 0.0
    assert background_orientation(LinkGeometry((0, 0, -4.0))) == 0.0
    assert background_orientation(LinkGeometry((1.0, 2.0, 0.0))) == pytest.approx(math.pi, abs=1e-15)
    assert background_orientation(LinkGeometry((3, 4, 5))) == pytest.approx(math.acos(1 / math.sqrt(10)), abs=1e-14)
    assert background_orientation(LinkGeometry((3, 4, 5))) == pytest.approx(1.24905, abs=5e-6)
    assert background_orientation(LinkGeometry((0, 0, 4.0), road_gradient=0.3)) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        background_orientation(LinkGeometry((0, 0, 0)))


@settings(max_examples=200)
@given(pos=st.tuples(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50)), grad=st.floats(-1, 1))
def test_orientation_range(pos, grad):
    if math.sqrt(sum(v * v for v in pos)) < 1e-3:
        return
    phi = background_orientation(LinkGeometry(pos, road_gradient=grad))
    assert grad - 1e-12 <= phi <= math.pi + grad + 1e-12


def test_aligned_gain_decays_with_distance():
    bs, vu = reference_coils()
    rng = np.random.default_rng(3)
    for _ in range(20):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        gains = [aligned_channel(bs, vu, LinkGeometry(tuple(r * u), skin_depth=30.0), 1e4).aligned_gain
                 for r in np.linspace(0.5, 60, 60)]
        assert all(b < a for a, b in zip(gains, gains[1:]))


def test_aligned_channel_invariants():
    bs, vu = reference_coils()
    ch = aligned_channel(bs, vu, LinkGeometry((2.0, -1.0, -6.0), road_gradient=0.2), 1e4)
    assert ch.circuit_gain > 0 and ch.aligned_gain >= 0
    assert ch.aligned_gain == pytest.approx(ch.circuit_gain * ch.aligned_mutual_inductance**2, rel=1e-15)
    assert 0.2 <= ch.background_orientation <= math.pi + 0.2
