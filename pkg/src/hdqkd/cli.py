"""Command-line entry point: ``hdqkd <subcommand> ...``.

Exit status is 1 when any check fails, 2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from hdqkd.errors import HDQKDError
from hdqkd.keyrate import reports_to_csv, reports_to_json
from hdqkd.optics import load_network, verify_golden_tables, verify_table
from hdqkd.paper_data import reproduce_tables
from hdqkd.scenario import Scenario, emit_curves, run_scenario

log = logging.getLogger("hdqkd")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _scenario_args(p: argparse.ArgumentParser, mode: str | None):
    p.add_argument("--config", type=Path, help="JSON file holding a scenario; flags override it")
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=_floats, help="comma-separated noise fractions")
    p.add_argument("--flavor", choices=["fourier", "hadamard"])
    p.add_argument("--pairs-per-sec", dest="pair_rate", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--seed", type=int)
    if mode is None:
        p.add_argument("--mode", choices=["analytic", "montecarlo", "paper-data"])
    p.add_argument("--workers", type=int, default=1)
    _output_args(p)


def _output_args(p: argparse.ArgumentParser):
    p.add_argument("--out", type=Path, help="write here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def _build_scenario(args, mode: str | None) -> Scenario:
    data = {}
    if args.config is not None:
        data = Scenario.from_file(args.config).to_dict()
    overrides = {"d": args.d, "k": args.k, "p_list": args.p, "flavor": args.flavor,
                 "pair_rate": args.pair_rate, "duration": args.duration, "seed": args.seed,
                 "mode": mode or getattr(args, "mode", None)}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if data.get("mode") == "paper-data" and args.p is None and "p_list" not in data:
        data["p_list"] = []
    return Scenario.from_mapping(data)


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text, encoding="utf-8")
        log.info("wrote %s", out)


def cmd_keyrate(args, mode=None) -> int:
    scenario = _build_scenario(args, mode)
    reports = run_scenario(scenario, workers=args.workers)
    _emit(reports_to_json(reports) if args.format == "json" else reports_to_csv(reports), args.out)
    return 0


def cmd_reproduce(args) -> int:
    report = reproduce_tables(args.data_dir)
    _emit(report.to_json() if args.format == "json" else report.to_csv(), args.out)
    bad = report.failures()
    log.warning("%d of %d checks failed", len(bad), len(report.checks)) if bad else \
        log.info("all %d checks passed", len(report.checks))
    return 1 if bad else 0


def cmd_cascade(args) -> int:
    if args.network is None:
        results = verify_golden_tables(args.tables)
    else:
        net = load_network(args.network)
        angles = json.loads(Path(args.angles).read_text()) if args.angles else {}
        expected = json.loads(Path(args.expected).read_text())
        dets = verify_table(net, angles, expected)
        results = [{"table": "custom", "basis": "", "network": net.name, "detectors": dets,
                    "max_deviation": max(r["deviation"] for r in dets.values()),
                    "pass": all(r["pass"] for r in dets.values())}]
    if args.format == "json":
        text = json.dumps(results, indent=2)
    else:
        lines = ["table,basis,detector,deviation,pass"]
        for r in results:
            for det, v in r["detectors"].items():
                lines.append(f"{r['table']},{r['basis']},{det},{v['deviation']:.3e},{v['pass']}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0 if all(r["pass"] for r in results) else 1


def cmd_curves(args) -> int:
    scenario = _build_scenario(args, "analytic")
    grid = [] if args.step == 0 else args.step
    curve = emit_curves(scenario, grid if args.p is None else scenario.p_list)
    _emit(curve.to_json() if args.format == "json" else curve.to_csv(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdqkd", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keyrate", help="key-rate reports (analytic by default)")
    _scenario_args(p, None)
    p.set_defaults(func=lambda a: cmd_keyrate(a))

    p = sub.add_parser("simulate", help="Monte Carlo coincidence runs")
    _scenario_args(p, "montecarlo")
    p.set_defaults(func=lambda a: cmd_keyrate(a, "montecarlo"))

    p = sub.add_parser("reproduce", help="consistency checks on the published tables")
    p.add_argument("--data-dir", type=Path)
    _output_args(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("cascade-verify", help="check analyser wave-plate settings")
    p.add_argument("--tables", type=Path, help="golden table file (default: built-in)")
    p.add_argument("--network", help="built-in network name or JSON config path")
    p.add_argument("--angles", help="JSON file mapping wave-plate id to degrees")
    p.add_argument("--expected", help="JSON file mapping detector id to amplitudes")
    _output_args(p)
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("curves", help="rate versus noise-fraction curves")
    _scenario_args(p, "analytic")
    p.add_argument("--step", type=float, default=0.01, help="grid step in p (0 for empty grid)")
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "cascade-verify" and args.network and not args.expected:
        parser.error("--network needs --expected")
    try:
        return args.func(args)
    except (HDQKDError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
