"""Command-line entry point: run, sweep-size, sweep-depth, report, verify."""
from __future__ import annotations

import argparse
import copy
import logging
import sys
from pathlib import Path

from . import experiments
from .report import ReportError, render_report, verify
from .scenario import SWITCHING_SCENARIO, ConfigError, Scenario, apply_overrides, load_config

EXIT_OK, EXIT_INTEGRITY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("hybridlink")


def _config(args) -> dict:
    data = load_config(args.config) if args.config else copy.deepcopy(SWITCHING_SCENARIO)
    data = apply_overrides(data, args.set or [])
    if args.seed is not None:
        data["seed"] = args.seed
    Scenario.from_dict(data)  # validate early for field-level messages
    return data


def cmd_run(args) -> int:
    scenario = Scenario.from_dict(_config(args))
    result, summary = experiments.run_scenario(scenario, args.out)
    for ev in summary["switch_events"]:
        print(f"{ev['from']}->{ev['to']}: requested {ev['requested_at_ms']:.3f} ms, "
              f"latency {ev['latency_ms']:.3f} ms")
    print(f"integrity: {summary['integrity']}")
    if result.failure:
        print(result.failure, file=sys.stderr)
        return EXIT_INTEGRITY
    return EXIT_OK


def cmd_sweep_size(args) -> int:
    sizes = [float(s) for s in args.sizes.split(",")]
    res = experiments.sweep_image_size(_config(args), sizes, args.repeats, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    experiments.write_json(res, out / "sweep_size.json")
    experiments.write_table(res["rows"], out / "sweep_size.csv")
    for row in res["rows"]:
        print(f"{row['direction']:<12} {row['size_kb']:>5.1f} KB  "
              f"frame-start {row['frame_start_latency_ms']:8.3f} ms")
    for key, slope in res["slopes_ms_per_kb"].items():
        print(f"slope {key}: {slope:.3f} ms/KB")
    return EXIT_OK


def cmd_sweep_depth(args) -> int:
    depths = [float(d) for d in args.depths.split(",")]
    res = experiments.sweep_depth(_config(args), depths)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    experiments.write_json(res, out / "sweep_depth.json")
    experiments.write_table(res["rows"], out / "sweep_depth.csv")
    for row in res["rows"]:
        print(f"{row['mode']:<16} {row['depth_cm']:5.1f} cm  {row['rssi_dbm']:8.2f} dBm  "
              f"{row['throughput_kbps']:9.1f} kbps  {row['power_mw']:7.2f} mW")
    return EXIT_OK


def cmd_report(args) -> int:
    for path in render_report(args.out):
        print(path)
    return EXIT_OK


def cmd_verify(args) -> int:
    problems = verify(args.out)
    for p in problems:
        print(p)
    print("verify: " + ("OK" if not problems else f"{len(problems)} mismatches"))
    return EXIT_OK if not problems else EXIT_INTEGRITY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridlink", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default="out"):
        p.add_argument("--config", help="scenario JSON file (default: built-in switching scenario)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", default=out_default)
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field, e.g. ble.policy=adaptive")

    p = sub.add_parser("run", help="run one scenario")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-size", help="switch latency vs image size")
    common(p)
    p.add_argument("--sizes", default="10,20,30,40", help="comma-separated KB")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep_size)

    p = sub.add_parser("sweep-depth", help="steady-state metrics vs depth")
    common(p)
    p.add_argument("--depths", default="0,2,4,6,8,10", help="comma-separated cm")
    p.set_defaults(func=cmd_sweep_depth)

    p = sub.add_parser("report", help="render plots and a text report for an output dir")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify", help="recompute summary.json from trace.csv")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ReportError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
