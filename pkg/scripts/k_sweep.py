"""Steady tracking error against the adaptation gain k.

Prints the time-averaged and peak tail errors and the ratio between
successive gains; with a doubling sequence an O(1/k) residual gives ratios
near 2.

    python3 scripts/k_sweep.py --gains 25 50 100 200 400 --t-end 1000
"""

from __future__ import annotations

import argparse

from rhythmctl.scenarios import build_scenario, run_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description="steady error versus adaptation gain")
    ap.add_argument("--kind", default="same-topology")
    ap.add_argument("--gains", type=float, nargs="+", default=[50.0, 100.0, 200.0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--t-end", type=float, default=1000.0)
    args = ap.parse_args()

    dt = min(1e-3, 1.0 / (10.0 * max(args.gains)))
    for seed in args.seeds:
        print(f"seed {seed}, dt {dt:g}, t_end {args.t_end:g}")
        print(f"{'k':>8s} {'mean |e_X|':>12s} {'ratio':>7s} {'peak |e_X|':>12s} {'ratio':>7s} {'tail CE^2':>11s}")
        prev = None
        for k in args.gains:
            _, r = run_scenario(build_scenario(args.kind, {"k": k, "t_end": args.t_end, "dt": dt}, seed))
            ratios = ("", "") if prev is None else (f"{prev[0] / r.steady_error_level:7.2f}",
                                                     f"{prev[1] / r.steady_error_peak:7.2f}")
            print(f"{k:8g} {r.steady_error_level:12.4e} {ratios[0]:>7s} {r.steady_error_peak:12.4e} "
                  f"{ratios[1]:>7s} {r.steady_ce2_mean:11.3e}")
            prev = (r.steady_error_level, r.steady_error_peak)


if __name__ == "__main__":
    main()
