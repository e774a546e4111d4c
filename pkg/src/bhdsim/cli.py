"""Command line entry point: ``bhdsim run|list|report``.

Exit codes: 0 success, 2 configuration error, 3 simulation error,
4 failed ``report --check``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, StageError
from .harness import BUILTIN_SCENARIOS, ScenarioConfig, dump_config, load_config, run_scenario
from .harness.checks import check_reports

log = logging.getLogger("bhdsim")

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_CHECK = 0, 2, 3, 4
OUTPUT_ENV = "BHDSIM_OUTPUT_DIR"


def _resolve(target: str, args) -> ScenarioConfig:
    if target in BUILTIN_SCENARIOS:
        cfg = BUILTIN_SCENARIOS[target]
    elif Path(target).is_file():
        cfg = load_config(target)
    else:
        raise ConfigError(f"{target!r} is neither a built-in scenario nor a config file (see `bhdsim list`)")
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.frequency_scale is not None:
        kw["frequency_scale"] = args.frequency_scale
    if args.noise is not None:
        kw["noise_enabled"] = args.noise
    return replace(cfg, **kw) if kw else cfg


def _run_one(cfg, out_root: Path) -> dict:
    result = run_scenario(cfg, out_dir=out_root / cfg.name)
    return result.report.to_dict()


def _summary_line(rep: dict) -> str:
    def f(v, unit=" dB"):
        return "-" if v is None else f"{v:.2f}{unit}"

    parts = [
        f"{rep['scenario']:<20}",
        f"peak {f(rep['peak_power_db'])}",
        f"floor {f(rep['floor_db'])}",
        f"snr {f(rep['snr_db'])}",
    ]
    if rep.get("envelope_period_lab_s") is not None:
        parts.append(f"period {rep['envelope_period_lab_s'] * 1e3:.2f} ms (lab scale)")
    if rep.get("theta_extinction_db") is not None:
        parts.append(f"extinction {f(rep['theta_extinction_db'])}")
    return "  ".join(parts)


def cmd_run(args) -> int:
    cfgs = [_resolve(t, args) for t in args.targets]
    if args.dump_config:
        for cfg in cfgs:
            sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    out_root = Path(args.out or os.environ.get(OUTPUT_ENV, "runs"))
    if args.jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, cfgs, [out_root] * len(cfgs)))
    else:
        reports = [_run_one(cfg, out_root) for cfg in cfgs]
    for rep in reports:
        print(_summary_line(rep))
    log.info("outputs written under %s", out_root)
    return EXIT_OK


def cmd_list(args) -> int:
    for name, cfg in BUILTIN_SCENARIOS.items():
        print(f"{name:<20} {cfg.description}")
    return EXIT_OK


def _collect(directory: Path) -> dict:
    reports = {}
    for path in sorted(directory.rglob("report.json")):
        rep = json.loads(path.read_text())
        reports[rep["scenario"]] = rep
    return reports


def cmd_report(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise ConfigError(f"{directory} is not a directory")
    reports = _collect(directory)
    if not reports:
        raise ConfigError(f"no report.json found under {directory}")
    for rep in reports.values():
        print(_summary_line(rep))
    if args.json:
        Path(args.json).write_text(json.dumps(reports, indent=2, sort_keys=True) + "\n")
    if not args.check:
        return EXIT_OK
    results = check_reports(reports)
    if not results:
        print("no checkable scenarios found")
        return EXIT_CHECK
    ok = True
    for res in results:
        print(res)
        ok &= res.passed
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bhdsim", description="Balanced homodyne/heterodyne detection simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run built-in scenarios or scenario config files")
    run.add_argument("targets", nargs="+", metavar="scenario|config-file")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("-o", "--out", default=None, help=f"output root (default: ${OUTPUT_ENV} or ./runs)")
    run.add_argument(
        "--frequency-scale", type=float, default=0.01,
        help="scale on all frequencies and rates, 1/scale on times (default 0.01; 1.0 is lab scale)",
    )
    noise = run.add_mutually_exclusive_group()
    noise.add_argument("--noise", dest="noise", action="store_true", default=None)
    noise.add_argument("--no-noise", dest="noise", action="store_false")
    run.add_argument("--jobs", type=int, default=1, help="run scenarios in parallel processes")
    run.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    run.set_defaults(func=cmd_run)

    lst = sub.add_parser("list", help="list built-in scenarios")
    lst.set_defaults(func=cmd_list)

    rep = sub.add_parser("report", help="aggregate report.json files under a directory")
    rep.add_argument("directory")
    rep.add_argument("--check", action="store_true", help="check metrics against the reference claims")
    rep.add_argument("--json", default=None, help="also write the aggregate as JSON")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"bhdsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        code = EXIT_CONFIG if isinstance(exc.cause, ConfigError) else EXIT_SIM
        kind = "config error" if code == EXIT_CONFIG else "simulation error"
        print(f"bhdsim: {kind} in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return code
    except Exception as exc:  # noqa: BLE001
        print(f"bhdsim: simulation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())
