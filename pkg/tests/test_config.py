from pathlib import Path

import pytest

from vmic.config import ConfigError, FadingSettings, RunSettings, load_config, parse_config, with_fading
from vmic.network import Scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def test_defaults():
    s = load_config(None)
    assert s == RunSettings()
    assert s.scenario == Scenario()
    assert s.fading.phi_deg == (15.0, 30.0, 60.0, 75.0)


def test_full_file():
    text = """
[geometry]
cell_count = 2
users_per_cell = 4
width = 50
height = 25
cell_side = 25
cell_centers = 12.5,12.5; 37.5,12.5
[mobility]
frozen = yes
avi_update_period = 10
[radio]
noise_psd = 1e-9
power_levels = 1, 2; 3
[coils]
bs_turns = 20
vu_radius = 0.3
[learning]
greedy_prob = 0.99
reward_mode = sampled
[fading]
phi_deg = 10, 20
z_points = 11
"""
    s = parse_config(text)
    sc = s.scenario
    assert sc.cell_count == 2 and sc.users_per_cell == 4 and sc.frozen
    assert sc.cell_centers == ((12.5, 12.5), (37.5, 12.5))
    assert sc.power_levels == (1.0, 2.0, 3.0)
    assert sc.bs_coil.turns == 20 and sc.vu_coil.radius == 0.3
    assert sc.learning.greedy_prob == 0.99 and sc.reward_mode == "sampled"
    assert s.fading.phi_deg == (10.0, 20.0) and s.fading.z_points == 11


@pytest.mark.parametrize("text", [
    "[geometri]\nwidth = 3\n",
    "[geometry]\nwidht = 3\n",
    "[geometry]\ncell_count = 2.5\n",
    "[geometry]\nwidth = abc\n",
    "[learning]\ngreedy_prob = 0.9\n",
    "[radio]\npower_levels = 3, 2\n",
    "[fading]\nz_points = 1\n",
    "[fading]\nsigma = -0.1\n",
    "[mobility]\nfrozen = maybe\n",
    "not an ini file",
])
def test_bad_files_raise_config_error(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_shipped_scenarios_load():
    desk = load_config(SCENARIOS / "desk.ini").scenario
    assert desk.cell_count == 13 and desk.users_per_cell == 32 and desk.learning.max_iterations == 300
    single = load_config(SCENARIOS / "single_cell.ini").scenario
    assert single.cell_count == 1 and single.frozen and single.learning.alpha0 == 1.0
    pair = load_config(SCENARIOS / "symmetric_pair.ini").scenario
    assert pair.centers == ((12.5, 12.5), (37.5, 12.5))


def test_with_fading_override():
    s = with_fading(RunSettings(), sigma=(0.1,), map_points=5)
    assert s.fading == FadingSettings(sigma=(0.1,), map_points=5)
