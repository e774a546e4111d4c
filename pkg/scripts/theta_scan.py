"""Homodyne beat power versus LO phase, next to the single-sideband level.

Runs the clock-synchronized two-sideband scenario at a list of fixed theta
values and prints the tone level at 5 MHz; the result follows cos^2(theta)
on top of the 4x gain, while a single sideband stays put.
"""

import argparse
import math

from bhdsim.harness import ThetaMode, get_scenario, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=7)
    ap.add_argument("--scale", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    thetas = [math.pi / 2 * k / (args.steps - 1) for k in range(args.steps)]
    cfg = get_scenario(
        "fig5b_theta0",
        frequency_scale=args.scale,
        seed=args.seed,
        theta_modes=tuple(ThetaMode("fixed", t) for t in thetas),
    )
    res = run_scenario(cfg)
    floor = res.report.floor_db
    single = res.report.single_sideband_db
    print(f"floor {floor:.2f} dB, single sideband tone {single:.2f} dB above reference")
    print("theta [deg]  displayed level above floor [dB]  expected [dB]")
    for t in thetas:
        label = ThetaMode("fixed", t).label
        level = res.report.traces[f"double_{label}"]["level_db"] - floor
        snr = 10 ** ((single - floor) / 10)
        expected = 10 * math.log10(4 * snr * math.cos(t) ** 2 + 1)
        print(f"{math.degrees(t):10.1f}  {level:8.2f}  {expected:8.2f}")


if __name__ == "__main__":
    main()
