"""Scenario files: INI sections with a fixed, documented schema.

Every key is optional and falls back to the default below; unknown sections
or keys are rejected so typos surface as configuration errors. Angles in
the file are degrees.

    [geometry]  cell_count, users_per_cell, width, height, z_west, z_east,
                bs_height, cell_side, cell_centers ("x,y; x,y; ...")
    [mobility]  max_velocity, slot_duration, avi_update_period, sigma2_max, frozen
    [radio]     noise_psd, sinr_threshold, rate_compensation, power_levels,
                frequency, skin_depth, permeability
    [coils]     bs_turns, bs_radius, vu_turns, vu_radius, wire_resistivity,
                load_resistance
    [learning]  discount, alpha0, alpha_decay, greedy_prob, max_iterations,
                reward_mode
    [fading]    phi_deg, sigma, z_points, sigma2_points, sweep_powers, aligned_gain,
                threshold, power_min, power_max, power_points, map_extent,
                map_depth, map_points
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Optional

from .circuit import CoilSpec, reference_coils
from .learning import LearningConfig
from .network import Scenario


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _centers(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for part in text.split(";"):
        if part.strip():
            x, y = (float(v) for v in part.split(","))
            out.append((x, y))
    return tuple(out)


def _int(text: str) -> int:
    f = float(text)
    if f != int(f):
        raise ValueError(f"not an integer: {text!r}")
    return int(f)


@dataclass(frozen=True)
class FadingSettings:
    """Grids for the figure-data commands."""

    phi_deg: tuple[float, ...] = (15.0, 30.0, 60.0, 75.0)
    sigma: tuple[float, ...] = (0.0, 0.3, 0.5, 0.7, 0.95)
    z_points: int = 201
    sigma2_points: int = 101
    sweep_powers: tuple[float, ...] = (0.5, 1.0, 2.0)
    aligned_gain: float = 1e-12
    threshold: float = 0.3
    power_min: float = 0.2
    power_max: float = 5.0
    power_points: int = 49
    map_extent: float = 10.0
    map_depth: float = 5.0
    map_points: int = 41


SCHEMA: dict[str, dict[str, tuple[str, Callable[[str], Any]]]] = {
    "geometry": {
        "cell_count": ("cell_count", _int),
        "users_per_cell": ("users_per_cell", _int),
        "width": ("width", float),
        "height": ("height", float),
        "z_west": ("z_west", float),
        "z_east": ("z_east", float),
        "bs_height": ("bs_height", float),
        "cell_side": ("cell_side", float),
        "cell_centers": ("cell_centers", _centers),
    },
    "mobility": {
        "max_velocity": ("max_velocity", float),
        "slot_duration": ("slot_duration", float),
        "avi_update_period": ("avi_update_period", _int),
        "sigma2_max": ("sigma2_max", float),
        "frozen": ("frozen", _bool),
    },
    "radio": {
        "noise_psd": ("noise_psd", float),
        "sinr_threshold": ("sinr_threshold", float),
        "rate_compensation": ("rate_compensation", float),
        "power_levels": ("power_levels", _floats),
        "frequency": ("frequency", float),
        "skin_depth": ("skin_depth", float),
        "permeability": ("permeability", float),
    },
    "coils": {
        "bs_turns": ("bs_turns", _int),
        "bs_radius": ("bs_radius", float),
        "vu_turns": ("vu_turns", _int),
        "vu_radius": ("vu_radius", float),
        "wire_resistivity": ("wire_resistivity", float),
        "load_resistance": ("load_resistance", float),
    },
    "learning": {
        "discount": ("discount", float),
        "alpha0": ("alpha0", float),
        "alpha_decay": ("alpha_decay", float),
        "greedy_prob": ("greedy_prob", float),
        "max_iterations": ("max_iterations", _int),
        "reward_mode": ("reward_mode", str),
    },
    "fading": {f.name: (f.name, _floats if f.type.startswith("tuple") else (_int if f.type == "int" else float))
               for f in fields(FadingSettings)},
}


@dataclass(frozen=True)
class RunSettings:
    scenario: Scenario = field(default_factory=Scenario)
    fading: FadingSettings = field(default_factory=FadingSettings)


def _coils(values: dict, frequency: float) -> tuple[CoilSpec, CoilSpec]:
    rho = values.get("wire_resistivity", 0.0166)
    bs0, vu0 = reference_coils(rho, frequency)
    load = values.get("load_resistance", vu0.load_resistance)
    bs = CoilSpec(values.get("bs_turns", bs0.turns), values.get("bs_radius", bs0.radius), rho, load, frequency)
    vu = CoilSpec(values.get("vu_turns", vu0.turns), values.get("vu_radius", vu0.radius), rho, load, frequency)
    return bs, vu


def parse_config(text: str, source: str = "<string>") -> RunSettings:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    parsed: dict[str, dict[str, Any]] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        parsed[section] = {}
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
            name, conv = SCHEMA[section][key]
            try:
                parsed[section][name] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{source}: [{section}] {key} = {raw!r}: {exc}") from exc
    try:
        return build_settings(parsed)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def build_settings(parsed: dict[str, dict[str, Any]]) -> RunSettings:
    kw: dict[str, Any] = {}
    for section in ("geometry", "mobility", "radio"):
        kw.update(parsed.get(section, {}))
    frequency = kw.get("frequency", 1e4)
    kw["bs_coil"], kw["vu_coil"] = _coils(parsed.get("coils", {}), frequency)
    learn = dict(parsed.get("learning", {}))
    mode = learn.pop("reward_mode", None)
    if mode is not None:
        kw["reward_mode"] = mode
    kw["learning"] = LearningConfig(**learn)
    fading = FadingSettings(**parsed.get("fading", {}))
    for name in ("z_points", "sigma2_points", "power_points", "map_points"):
        if getattr(fading, name) < 2:
            raise ValueError(f"fading grid '{name}' needs at least 2 points")
    if not fading.phi_deg or not fading.sigma:
        raise ValueError("fading grids phi_deg and sigma must be nonempty")
    if any(not math.isfinite(s) or s < 0 for s in fading.sigma):
        raise ValueError("sigma values must be finite and non-negative")
    return RunSettings(Scenario(**kw), fading)


def load_config(path: Optional[str | Path]) -> RunSettings:
    """Read a scenario file; ``None`` gives the built-in defaults."""
    if path is None:
        return RunSettings()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"scenario file not found: {p}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {p}: {exc}") from exc
    return parse_config(text, str(p))


def with_fading(settings: RunSettings, **kw) -> RunSettings:
    return replace(settings, fading=replace(settings.fading, **kw))
