import csv
import io
import math
from pathlib import Path

import numpy as np
import pytest

from vmic import figures
from vmic.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_TOLERANCE, run
from vmic.config import RunSettings
from vmic.fading import expectation_bcs

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
SMALL = ["--phi-deg", "30,75", "--sigma", "0,0.5"]


def read(path):
    text = Path(path).read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# schema: ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


@pytest.mark.parametrize("command", ["cdf", "pdf", "expectation", "spatial-map", "outage-sweep", "oracle-compare"])
def test_byte_identical_reruns(tmp_path, command):
    extra = ["--map-points", "9"] if command == "spatial-map" else []
    codes, blobs = [], []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        codes.append(run([command, "--out", str(out), "--seed", "7", "--samples", "2000", *SMALL, *extra]))
        blobs.append(out.read_bytes())
    assert codes[0] == codes[1] and codes[0] in (EXIT_OK, EXIT_TOLERANCE)
    assert blobs[0] == blobs[1]
    assert b"," in blobs[0] and blobs[0].startswith(b"# schema: ")


def test_cdf_rows(tmp_path):
    out = tmp_path / "cdf.csv"
    assert run(["cdf", "--out", str(out), "--phi-deg", "30", "--sigma", "0,0.5", "--z-points", "101"]) == EXIT_OK
    rows = read(out)
    step = [r for r in rows if r["sigma"] == "0.0" and r["kind"] == "curve"]
    assert {float(r["cdf"]) for r in step} == {0.0, 1.0}
    atom = [r for r in rows if r["sigma"] == "0.5" and r["kind"] == "atom"]
    assert len(atom) == 1
    assert float(atom[0]["z"]) == pytest.approx(0.25, abs=1e-15)
    assert float(atom[0]["atom_mass"]) == pytest.approx(math.erfc(math.sqrt(2.0)), abs=1e-15)


def test_expectation_columns(tmp_path):
    out = tmp_path / "e.csv"
    assert run(["expectation", "--out", str(out), "--phi-deg", "0,30,60", "--sigma", "0.95"]) == EXIT_OK
    rows = read(out)
    assert float(rows[0]["expectation_phi_0.0"]) == 1.0
    assert float(rows[-1]["sigma"]) == pytest.approx(0.95)
    assert float(rows[-1]["expectation_phi_0.0"]) == pytest.approx(0.505, abs=0.01)
    a = np.array([float(r["expectation_phi_30.0"]) for r in rows[1:]])
    b = np.array([float(r["expectation_phi_60.0"]) for r in rows[1:]])
    # near-mirror columns: close but not equal
    assert np.max(np.abs(a + b - 1)) < 0.35 and np.all(a != b)


def test_spatial_map(tmp_path):
    out = tmp_path / "m.csv"
    assert run(["spatial-map", "--out", str(out), "--sigma", "0,0.95", "--map-points", "21"]) == EXIT_OK
    rows = read(out)
    sentinel = [r for r in rows if r["expectation"] == "nan"]
    assert len(sentinel) == 2 and all(r["plane"] == "vertical" for r in sentinel)
    zero = [r for r in rows if r["sigma"] == "0.0" and r["expectation"] != "nan"]
    for r in zero:
        assert float(r["expectation"]) == pytest.approx(math.cos(float(r["phi_rad"])) ** 2, abs=1e-12)
    # horizontal plane: equal radius, equal value
    horiz = {(float(r["u"]), float(r["v"])): float(r["expectation"])
             for r in rows if r["plane"] == "horizontal" and r["sigma"] == "0.95"}
    for (u, v), e in horiz.items():
        assert horiz[(v, u)] == pytest.approx(e, abs=1e-12)
        assert horiz[(-u, -v)] == pytest.approx(e, abs=1e-12)


def test_spatial_spread_shrinks_with_vibration():
    settings = RunSettings()
    table = figures.spatial_map_table(settings)
    assert figures.slice_spread(table, 0.95) < figures.slice_spread(table, 0.0)


def test_outage_sweep(tmp_path):
    out = tmp_path / "o.csv"
    assert run(["outage-sweep", "--out", str(out), "--phi-deg", "60", "--sigma", "0.3,0.95",
                "--power-points", "200"]) == EXIT_OK
    rows = read(out)
    power = [r for r in rows if r["sweep"] == "power"]
    for s2 in {r["sigma2"] for r in power}:
        rho = [float(r["outage"]) for r in power if r["sigma2"] == s2]
        assert np.all(np.diff(rho) <= 1e-15)
    # a jump appears where the CDF argument crosses sin^2(phi)
    s = math.sin(math.radians(60)) ** 2
    fam = [r for r in power if r["sigma2"] == repr(0.95 * 0.95)]
    p = np.array([float(r["power_W"]) for r in fam])
    rho = np.array([float(r["outage"]) for r in fam])
    cross = 0.3 * 1e-12 / (1e-12 * s)
    i = np.searchsorted(p, cross)
    drops = -np.diff(rho)
    assert int(np.argmax(drops)) == i - 1
    assert drops[i - 1] >= math.erfc(math.sqrt(1 / (2 * 0.9025)))


def test_oracle_compare_default_seed_has_one_false_alarm(tmp_path):
    out = tmp_path / "oracle.csv"
    assert run(["oracle-compare", "--out", str(out)]) == EXIT_TOLERANCE
    rows = read(out)
    assert len(rows) == 64
    failing = [r for r in rows if r["pass"] == "false"]
    assert [(r["check"], r["phi_deg"], r["sigma"]) for r in failing] == [("expectation", "30.0", "0.95")]
    r = failing[0]
    assert float(r["diff"]) / (float(r["tolerance"]) / 3) < 3.2
    # the same case with 2e6 samples: the closed form is unbiased
    from vmic.oracle import empirical_expectation, sample_batch
    mean, se = empirical_expectation(sample_batch(0.95, math.radians(30), 2_000_000, 123))
    assert abs(mean - float(expectation_bcs(math.radians(30), 0.9025))) < 2 * se


def test_oracle_gate_failure_rate_is_nominal():
    settings = RunSettings()
    failed = total = 0
    for seed in range(40):
        rows = figures.oracle_compare_table(settings, 5000, seed).rows
        failed += sum(not r[-1] for r in rows)
        total += len(rows)
    # 3-sigma gates: about 0.3% of comparisons miss by chance
    assert failed / total < 0.01


def test_oracle_compare_passes_with_generous_samples(tmp_path):
    assert run(["oracle-compare", "--out", str(tmp_path / "x.csv"), "--seed", "1"]) == EXIT_OK


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[geometry]\nwidht = 3\n")
    assert run(["cdf", "--scenario", str(bad)]) == EXIT_CONFIG
    assert run(["cdf", "--scenario", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    assert run(["cdf", "--z-points", "1"]) == EXIT_CONFIG
    assert run(["oracle-compare", "--samples", "0"]) == EXIT_CONFIG
    assert run(["learn"]) == EXIT_CONFIG
    assert run(["learn", "--out", str(tmp_path / "l"), "--iterations", "0"]) == EXIT_CONFIG


def test_io_errors(tmp_path):
    assert run(["cdf", "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["learn", "--scenario", str(SCENARIOS / "single_cell.ini"), "--out", str(blocker / "sub")]) == EXIT_IO


def test_stdout_output(capsys):
    assert run(["expectation", "--phi-deg", "45", "--sigma", "0.5", "--sigma2-points", "3"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "# schema: expectation/1"
    assert out[1] == "sigma,sigma2,expectation_phi_45.0"
    assert len(out) == 5


def test_learn_single_cell_converges(tmp_path):
    out = tmp_path / "run"
    code = run(["learn", "--scenario", str(SCENARIOS / "single_cell.ini"), "--out", str(out), "--qtables"])
    assert code == EXIT_OK
    summary = read(out / "summary.csv")
    assert summary[-1]["cell"] == "converged" and summary[-1]["final_channel"] == "true"
    assert (out / "qtable_0.csv").exists()
    trace = read(out / "trace.csv")
    assert len(trace) == 5000 and list(trace[0]) == ["iteration", "cell", "action_channel", "action_power_W",
                                                     "n_co", "reward", "max_Q_delta"]


def test_learn_desk_scenario_columns(tmp_path):
    out = tmp_path / "desk"
    args = ["learn", "--scenario", str(SCENARIOS / "desk.ini"), "--out", str(out), "--iterations", "60"]
    assert run(args) == EXIT_OK
    util = read(out / "utility.csv")
    assert len(util) == 60
    assert sum(c.startswith("cell_") for c in util[0]) == 13
    summary = read(out / "summary.csv")
    assert len(summary) == 14 and all(r["bound_respected"] == "true" for r in summary[:-1])
    again = tmp_path / "desk2"
    assert run(args[:3] + ["--out", str(again), "--iterations", "60"]) == EXIT_OK
    for name in ("trace.csv", "utility.csv", "summary.csv"):
        assert (out / name).read_bytes() == (again / name).read_bytes()
