"""Run every built-in scenario, write traces and reports, and check the reference claims.

    python3 scripts/reproduce_figures.py --out runs/figures
    python3 scripts/reproduce_figures.py fig2e fig6_single --scale 1.0
"""

import argparse
import json
import time
from dataclasses import replace
from pathlib import Path

from bhdsim.harness import BUILTIN_SCENARIOS, run_scenario
from bhdsim.harness.checks import check_reports


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="*", default=list(BUILTIN_SCENARIOS))
    ap.add_argument("--scale", type=float, default=0.01, help="frequency scale (1.0 = lab rates)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/figures"))
    args = ap.parse_args()

    reports = {}
    for name in args.names:
        cfg = replace(BUILTIN_SCENARIOS[name], frequency_scale=args.scale, seed=args.seed)
        t0 = time.monotonic()
        rep = run_scenario(cfg, out_dir=args.out / name).report
        reports[name] = rep.to_dict()
        extra = ""
        if rep.envelope_period_lab_s is not None:
            extra = f"  period {rep.envelope_period_lab_s * 1e3:7.2f} ms"
        snr = "   -  " if rep.snr_db is None else f"{rep.snr_db:6.2f}"
        print(f"{name:<20} snr {snr} dB{extra}  ({time.monotonic() - t0:.1f} s)")

    (args.out / "summary.json").write_text(json.dumps(reports, indent=2, sort_keys=True) + "\n")
    print()
    for res in check_reports(reports):
        print(res)


if __name__ == "__main__":
    main()
