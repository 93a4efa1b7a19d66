"""Command-line driver: batch runs, verification suites, run comparison
and the live service.

Exit codes: 0 success, 1 failed verification checks, 2 invalid
configuration or arguments, 3 runtime failure during simulation.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .engine import read_jsonl, run, steady_state_mean, write_jsonl, write_metrics_csv
from .errors import CoverageError, InvalidScenario
from .scenario import ScenarioConfig
from .verify import SUITES, run_suite

TRAJECTORY_FILE = "trajectory.jsonl"
METRICS_FILE = "metrics.csv"
MANIFEST_FILE = "manifest.json"
COMPARISON_FILE = "comparison.csv"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmcover",
        description="Coverage-control swarm simulator and live service",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario to files")
    p_run.add_argument("scenario", help="scenario JSON path")
    p_run.add_argument("--out", default="runs/latest", help="output directory")
    p_run.add_argument("--law", choices=("tvd_c", "tvd_d1"),
                       help="override the control law")
    p_run.add_argument("--feedforward", choices=("on", "off"),
                       help="override the boundary-motion feedforward switch")
    p_run.add_argument("--seed", type=int, help="override the seeding RNG")

    p_verify = sub.add_parser("verify", help="run numeric validation suites")
    p_verify.add_argument("--suite", default="all",
                          choices=sorted(SUITES) + ["all"])

    p_report = sub.add_parser("report", help="summarize or compare run dirs")
    p_report.add_argument("run_dir", help="run directory (the candidate)")
    p_report.add_argument("--compare", metavar="OTHER_DIR",
                          help="baseline run directory")
    p_report.add_argument("--window", type=float, default=None,
                          help="steady-state window in seconds "
                               "(default: trailing third of the run)")

    p_serve = sub.add_parser("serve", help="serve a live steerable session")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8700)
    p_serve.add_argument("--realtime-factor", type=float, default=1.0,
                         help="simulated seconds per wall second")
    p_serve.add_argument("--decimation", type=int, default=2,
                         help="stream every Nth tick")
    return parser


def _load_with_overrides(args) -> ScenarioConfig:
    try:
        with open(args.scenario) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise InvalidScenario(f"{args.scenario}: {err}") from err
    if not isinstance(data, dict):
        raise InvalidScenario("scenario document must be a JSON object")
    if getattr(args, "law", None):
        data.setdefault("control", {})["law"] = args.law
    if getattr(args, "feedforward", None):
        data.setdefault("control", {})["feedforward"] = args.feedforward == "on"
    if getattr(args, "seed", None) is not None:
        data["rng_seed"] = args.seed
    return ScenarioConfig.from_dict(data)


def _cmd_run(args) -> int:
    try:
        cfg = _load_with_overrides(args)
    except InvalidScenario as err:
        print(f"invalid scenario: {err}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        log = run(cfg)
    except CoverageError as err:
        print(f"simulation failed: {type(err).__name__}: {err}", file=sys.stderr)
        return 3
    write_jsonl(log, out / TRAJECTORY_FILE)
    write_metrics_csv(log, out / METRICS_FILE)
    manifest = {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "scenario_hash": cfg.scenario_hash(),
        "seed": cfg.rng_seed,
        "records": len(log.times),
        "versions": {
            "swarmcover": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "argv": sys.argv[1:],
        "files": {"trajectory": TRAJECTORY_FILE, "metrics": METRICS_FILE},
    }
    with open(out / MANIFEST_FILE, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out} ({len(log.times)} records, "
          f"scenario {cfg.scenario_hash()[:12]})")
    return 0


def _cmd_verify(args) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    failed = False
    for name in names:
        result = run_suite(name)
        print(f"suite {name}: {'PASS' if result.passed else 'FAIL'}")
        for label, ok, detail in result.checks:
            line = f"  {'ok  ' if ok else 'FAIL'} {label}"
            if detail:
                line += f"  [{detail}]"
            print(line)
        failed = failed or not result.passed
    return 1 if failed else 0


def _read_run_dir(path: Path):
    try:
        with open(path / MANIFEST_FILE) as fh:
            manifest = json.load(fh)
        log = read_jsonl(path / manifest["files"]["trajectory"])
    except (OSError, json.JSONDecodeError, KeyError) as err:
        raise InvalidScenario(f"{path} is not a run directory: {err}") from err
    return manifest, log


def _cmd_report(args) -> int:
    try:
        manifest, log = _read_run_dir(Path(args.run_dir))
    except InvalidScenario as err:
        print(str(err), file=sys.stderr)
        return 2
    span = log.times[-1] - log.times[0]
    window = args.window if args.window is not None else span / 3.0
    try:
        mean = steady_state_mean(log, window)
    except CoverageError as err:
        print(f"report failed: {err}", file=sys.stderr)
        return 2
    print(f"run {args.run_dir}: scenario {manifest['scenario_hash'][:12]}, "
          f"{len(log.times)} records, t in [{log.times[0]:g}, {log.times[-1]:g}]")
    print(f"steady-state mean e_a (trailing {window:g} s): {mean:.6g}")
    if not args.compare:
        return 0

    try:
        other_manifest, other_log = _read_run_dir(Path(args.compare))
    except InvalidScenario as err:
        print(str(err), file=sys.stderr)
        return 2
    if other_manifest["scenario_hash"] != manifest["scenario_hash"]:
        print("scenario hashes differ; runs are not comparable",
              file=sys.stderr)
        return 2
    try:
        other_mean = steady_state_mean(other_log, window)
    except CoverageError as err:
        print(f"report failed: {err}", file=sys.stderr)
        return 2
    out = Path(args.run_dir) / COMPARISON_FILE
    with open(out, "w") as fh:
        fh.write("t,e_a_run,e_a_other\n")
        for t, a, b in zip(log.times, log.e_a, other_log.e_a):
            fh.write(f"{t!r},{a!r},{b!r}\n")
    print(f"baseline {args.compare}: steady-state mean e_a {other_mean:.6g}")
    print(f"wrote {out}")
    if other_mean > 0:
        improvement = (other_mean - mean) / other_mean * 100.0
    else:
        improvement = 0.0
    print(f"improvement: {improvement:.1f}%")
    return 0


def _cmd_serve(args) -> int:
    try:
        with open(args.scenario) as fh:
            data = json.load(fh)
        cfg = ScenarioConfig.from_dict(data)
    except (OSError, json.JSONDecodeError, InvalidScenario) as err:
        print(f"invalid scenario: {err}", file=sys.stderr)
        return 2
    if args.realtime_factor <= 0:
        print("realtime factor must be positive", file=sys.stderr)
        return 2
    if args.decimation < 1:
        print("decimation must be at least 1", file=sys.stderr)
        return 2
    from .gateway import serve

    serve(cfg, host=args.host, port=args.port,
          realtime_factor=args.realtime_factor, decimation=args.decimation)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "verify": _cmd_verify,
        "report": _cmd_report,
        "serve": _cmd_serve,
    }[args.subcommand]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
