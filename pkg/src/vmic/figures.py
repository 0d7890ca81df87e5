"""Data behind the fading, spatial and outage curves, plus oracle reports.

Every generator returns ``(schema, header, rows)``. Rows hold plain Python
values and :func:`write_csv` renders floats with ``repr`` so output is
locale-independent, full precision and byte-stable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import orientation_array
from .config import RunSettings
from .fading import (
    LinkBudget,
    bcs_atom_mass,
    cdf_bcs,
    expectation_bcs,
    fold_orientation,
    outage_probability,
    pdf_bcs,
)
from .oracle import (
    binomial_se,
    boundary_fraction,
    empirical_expectation,
    empirical_outage,
    ks_distance,
    sample_batch,
)
from .vibration import bcs_distribution

SENTINEL = "nan"


@dataclass
class Table:
    schema: str
    header: Sequence[str]
    rows: list


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(table: Table, fh) -> None:
    fh.write(f"# schema: {table.schema}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])


def _law_atom(phi: float, sigma: float) -> tuple[float, float]:
    """Location and size of the jump of the gain CDF."""
    phi = fold_orientation(phi)
    if sigma == 0:
        return math.cos(phi) ** 2, 1.0
    return math.sin(phi) ** 2, float(bcs_atom_mass(sigma * sigma))


def cdf_table(settings: RunSettings) -> Table:
    f = settings.fading
    z = np.linspace(0.0, 1.0, f.z_points)
    rows = []
    for deg in f.phi_deg:
        phi = math.radians(deg)
        for sigma in f.sigma:
            values = np.atleast_1d(cdf_bcs(z, phi, sigma * sigma))
            for zi, v in zip(z, values):
                rows.append([deg, sigma, "curve", float(zi), float(v), 0.0])
            loc, mass = _law_atom(phi, sigma)
            rows.append([deg, sigma, "atom", loc, float(cdf_bcs(loc, phi, sigma * sigma)), mass])
    return Table("cdf/1", ["phi_deg", "sigma", "kind", "z", "cdf", "atom_mass"], rows)


def pdf_table(settings: RunSettings) -> Table:
    f = settings.fading
    z = np.linspace(0.0, 1.0, f.z_points)[1:-1]
    rows = []
    for deg in f.phi_deg:
        phi = math.radians(deg)
        for sigma in f.sigma:
            dens = np.atleast_1d(pdf_bcs(z, phi, sigma * sigma).density)
            for zi, d in zip(z, dens):
                rows.append([deg, sigma, "curve", float(zi), float(d), 0.0])
            loc, mass = _law_atom(phi, sigma)
            rows.append([deg, sigma, "atom", loc, 0.0, mass])
    return Table("pdf/1", ["phi_deg", "sigma", "kind", "z", "density", "atom_mass"], rows)


def expectation_table(settings: RunSettings) -> Table:
    f = settings.fading
    sigma = np.linspace(0.0, max(f.sigma), f.sigma2_points)
    cols = [np.atleast_1d(expectation_bcs(math.radians(d), sigma**2)) for d in f.phi_deg]
    header = ["sigma", "sigma2"] + [f"expectation_phi_{_fmt(float(d))}" for d in f.phi_deg]
    rows = [[float(s), float(s * s)] + [float(c[i]) for c in cols] for i, s in enumerate(sigma)]
    return Table("expectation/1", header, rows)


def spatial_grid(settings: RunSettings):
    f = settings.fading
    u = np.linspace(-f.map_extent, f.map_extent, f.map_points)
    return u


def spatial_map_table(settings: RunSettings) -> Table:
    """Mean gain around a base station: a horizontal plane and a vertical slice."""
    f = settings.fading
    grad = settings.scenario.road_gradient
    u = spatial_grid(settings)
    planes = {
        "horizontal": [(a, b, (a, b, -f.map_depth)) for b in u for a in u],
        "vertical": [(a, b, (a, 0.0, b)) for b in u for a in u],
    }
    rows = []
    for plane, points in planes.items():
        for sigma in f.sigma:
            for a, b, rel in points:
                if rel == (0.0, 0.0, 0.0):
                    rows.append([plane, sigma, float(a), float(b), SENTINEL, SENTINEL])
                    continue
                phi = float(orientation_array(np.array(rel), grad))
                rows.append([plane, sigma, float(a), float(b), phi, float(expectation_bcs(phi, sigma * sigma))])
    return Table("spatial-map/1", ["plane", "sigma", "u", "v", "phi_rad", "expectation"], rows)


def slice_spread(table: Table, sigma: float, plane: str = "vertical") -> float:
    vals = [r[5] for r in table.rows if r[0] == plane and r[1] == sigma and r[5] != SENTINEL]
    return max(vals) - min(vals)


def _budget(settings: RunSettings, power: float) -> LinkBudget:
    return LinkBudget(power, settings.fading.aligned_gain, settings.scenario.noise_psd)


def outage_sweep_table(settings: RunSettings) -> Table:
    """Outage against average AVI at fixed powers, and against power at fixed AVIs."""
    f = settings.fading
    rows = []
    s2_grid = np.linspace(0.0, 1.0, f.sigma2_points)[1:]
    p_grid = np.linspace(f.power_min, f.power_max, f.power_points)
    for deg in f.phi_deg:
        phi = math.radians(deg)
        for power in f.sweep_powers:
            for s2 in s2_grid:
                rho = outage_probability(_budget(settings, power), phi, bcs_distribution(float(s2)), f.threshold)
                rows.append(["sigma2", deg, float(power), float(s2), rho])
        for sigma in f.sigma:
            if sigma == 0:
                continue
            vib = bcs_distribution(sigma * sigma)
            for power in p_grid:
                rho = outage_probability(_budget(settings, float(power)), phi, vib, f.threshold)
                rows.append(["power", deg, float(power), sigma * sigma, rho])
    return Table("outage-sweep/1", ["sweep", "phi_deg", "power_W", "sigma2", "outage"], rows)


# -- oracle comparison -------------------------------------------------------

KS_TOLERANCE = 0.03
SIGMA_GATE = 3.0


def oracle_compare_table(settings: RunSettings, samples: int, seed: int) -> Table:
    """Closed form against Monte Carlo for every ``(phi, sigma > 0)`` pair."""
    f = settings.fading
    rows = []
    case = 0
    for deg in f.phi_deg:
        phi = math.radians(deg)
        for sigma in f.sigma:
            if sigma == 0:
                continue
            s2 = sigma * sigma
            batch = sample_batch(sigma, phi, samples, [seed, case])
            loc, mass = _law_atom(phi, sigma)

            def cdf(z, phi=phi, s2=s2):
                return cdf_bcs(z, phi, s2)

            ks = ks_distance(batch, cdf, atom=(loc, mass))
            g = np.sort(batch.gains)
            diffs = np.abs(np.searchsorted(g, g, side="right") / batch.count - np.asarray(cdf(g)))
            z_at = float(g[int(np.argmax(diffs))])
            emp_cdf = float(np.searchsorted(g, z_at, side="right") / batch.count)
            rows.append(["cdf_ks", deg, sigma, z_at, float(cdf(z_at)), emp_cdf, ks, KS_TOLERANCE, ks < KS_TOLERANCE])

            frac = boundary_fraction(batch)
            tol = SIGMA_GATE * binomial_se(mass, samples)
            rows.append(["atom", deg, sigma, loc, mass, frac, abs(frac - mass), tol, abs(frac - mass) <= tol])

            mean, se = empirical_expectation(batch)
            e = float(expectation_bcs(phi, s2))
            rows.append(["expectation", deg, sigma, SENTINEL, e, mean, abs(mean - e), SIGMA_GATE * se,
                         abs(mean - e) <= SIGMA_GATE * se])

            budget = _budget(settings, 1.0)
            rho = outage_probability(budget, phi, bcs_distribution(s2), f.threshold)
            emp = empirical_outage(budget, phi, sigma, f.threshold, samples, [seed, case])
            tol = max(SIGMA_GATE * binomial_se(rho, samples), 1.0 / samples)
            z_out = f.threshold * settings.scenario.noise_psd / (f.aligned_gain * 1.0)
            rows.append(["outage", deg, sigma, z_out, rho, emp, abs(emp - rho), tol, abs(emp - rho) <= tol])
            case += 1
    header = ["check", "phi_deg", "sigma", "z", "closed_form", "empirical", "diff", "tolerance", "pass"]
    return Table("oracle-compare/1", header, rows)


def all_pass(table: Table) -> bool:
    idx = list(table.header).index("pass")
    return all(bool(r[idx]) for r in table.rows)


def tables_equal(a: Table, b: Table) -> bool:
    return a.schema == b.schema and list(a.header) == list(b.header) and a.rows == b.rows


def rows_of(table: Table, **match) -> Iterable[list]:
    idx = {h: i for i, h in enumerate(table.header)}
    for r in table.rows:
        if all(r[idx[k]] == v for k, v in match.items()):
            yield r
