"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical-tolerance
failure, 4 I/O error. Angles on the command line and in scenario files are
degrees; everything past this boundary works in radians.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import figures
from .config import ConfigError, RunSettings, load_config, with_fading
from .learning import LearningConfigError, write_qtable
from .qpower import coefficient_of_variation, deviation_gains, run_learning, stabilization_iteration

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE, EXIT_IO = 0, 2, 3, 4


class OutputError(OSError):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not vals:
        raise argparse.ArgumentTypeError("list must be nonempty")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vmic", description="Vehicle MI channel statistics and power-control simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help="output CSV path (stdout when omitted)"):
        sp.add_argument("--scenario", help="scenario INI file")
        sp.add_argument("--out", help=out_help)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=5000)
        sp.add_argument("--phi-deg", type=_float_list, help="comma-separated orientations in degrees")
        sp.add_argument("--sigma", type=_float_list, help="comma-separated vibration standard deviations")
        return sp

    for name in ("cdf", "pdf"):
        common(sub.add_parser(name, help=f"closed-form {name.upper()} curves")).add_argument("--z-points", type=int)
    common(sub.add_parser("expectation", help="mean gain against vibration level")).add_argument(
        "--sigma2-points", type=int)
    sm = common(sub.add_parser("spatial-map", help="mean gain around a base station"))
    sm.add_argument("--map-points", type=int)
    sm.add_argument("--map-extent", type=float)
    sw = common(sub.add_parser("outage-sweep", help="outage against average AVI and power"))
    sw.add_argument("--power-points", type=int)
    sw.add_argument("--sigma2-points", type=int)
    common(sub.add_parser("oracle-compare", help="closed forms against Monte Carlo"))
    ln = common(sub.add_parser("learn", help="run the multiagent Q-learning"), "output directory")
    ln.add_argument("--iterations", type=int)
    ln.add_argument("--track-greedy", action="store_true", help="also record greedy-profile utilities")
    ln.add_argument("--qtables", action="store_true", help="write a Q-table snapshot per cell")
    return p


_GRID_FLAGS = {
    "phi_deg": "phi_deg", "sigma": "sigma", "z_points": "z_points", "sigma2_points": "sigma2_points",
    "map_points": "map_points", "map_extent": "map_extent", "power_points": "power_points",
}


def _settings(args) -> RunSettings:
    settings = load_config(args.scenario)
    over = {f: getattr(args, a) for a, f in _GRID_FLAGS.items() if getattr(args, a, None) is not None}
    try:
        settings = with_fading(settings, **over)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    f = settings.fading
    if min(f.z_points, f.sigma2_points, f.power_points, f.map_points) < 2:
        raise ConfigError("grid resolutions need at least 2 points")
    if any(s < 0 for s in f.sigma):
        raise ConfigError("sigma values must be non-negative")
    if args.samples < 1:
        raise ConfigError("--samples must be at least 1")
    if args.seed < 0:
        raise ConfigError("--seed must be non-negative")
    return settings


def _emit(table: figures.Table, out: Optional[str]) -> None:
    if out is None:
        figures.write_csv(table, sys.stdout)
        return
    path = Path(out)
    buf = io.StringIO()
    figures.write_csv(table, buf)
    try:
        path.write_text(buf.getvalue(), encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _write(path: Path, writer) -> None:
    buf = io.StringIO()
    writer(buf)
    try:
        path.write_text(buf.getvalue(), encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def cmd_learn(args, settings: RunSettings) -> int:
    if args.out is None:
        raise ConfigError("learn needs --out <directory>")
    sc = settings.scenario
    if args.iterations is not None:
        if args.iterations < 1:
            raise ConfigError("--iterations must be positive")
        sc = replace(sc, learning=replace(sc.learning, max_iterations=args.iterations))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc}") from exc
    result = run_learning(sc, args.seed, track_greedy=args.track_greedy)

    _write(out / "trace.csv", result.write_trace)

    def utilities(fh):
        fh.write("# schema: utility/1\n")
        w = csv.writer(fh, lineterminator="\n")
        K = sc.cell_count
        w.writerow(["iteration"] + [f"cell_{k}" for k in range(K)] + [f"bound_{k}" for k in range(K)])
        for t in range(result.iterations):
            w.writerow([t] + [repr(float(v)) for v in result.reward[t]] + [repr(float(v)) for v in result.bound[t]])

    _write(out / "utility.csv", utilities)

    window = min(50, result.iterations)
    cv = coefficient_of_variation(result.reward, window)
    stable_at = stabilization_iteration(result.reward, window)
    gains = deviation_gains(sc, result.links, result.final_strategies)

    def summary(fh):
        fh.write("# schema: learn-summary/1\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell", "final_channel", "final_power_W", "best_deviation_gain", "cv_last_window",
                    "stabilized_at", "bound_respected"])
        for k, (ch, p) in enumerate(result.final_strategies):
            w.writerow([k, ch, repr(sc.power_levels[p]), repr(float(gains[k])), repr(float(cv[k])),
                        "" if stable_at is None else stable_at, "true" if result.bound_respected() else "false"])
        w.writerow(["converged", "true" if bool(np.all(gains <= 0.01)) else "false", "", "", "", "", ""])

    _write(out / "summary.csv", summary)
    if args.qtables:
        for k, table in enumerate(result.tables):
            _write(out / f"qtable_{k}.csv", lambda fh, t=table: write_qtable(t, fh))
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = _settings(args)
        if args.command == "learn":
            return cmd_learn(args, settings)
        if args.command == "oracle-compare":
            table = figures.oracle_compare_table(settings, args.samples, args.seed)
            _emit(table, args.out)
            return EXIT_OK if figures.all_pass(table) else EXIT_TOLERANCE
        builders = {
            "cdf": figures.cdf_table,
            "pdf": figures.pdf_table,
            "expectation": figures.expectation_table,
            "spatial-map": figures.spatial_map_table,
            "outage-sweep": figures.outage_sweep_table,
        }
        _emit(builders[args.command](settings), args.out)
        return EXIT_OK
    except (ConfigError, LearningConfigError) as exc:
        print(f"vmic: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"vmic: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
