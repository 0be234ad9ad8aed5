"""Tail CE^2 against the simulated horizon.

Once the nonlinear terms are cancelled, the error obeys a linear system
whose slow eigenvalue is about -2*epsilon.  The controller has no authority
over that mode, so the settling time is set by epsilon rather than by k.
This script measures the tail CE^2 over a range of horizons and compares
the decay with the slow rate.

    python3 scripts/horizon_study.py --kind same-topology --seeds 0 1 2 3 4
"""

from __future__ import annotations

import argparse

import numpy as np

from rhythmctl.control import exact_cancellation_rates
from rhythmctl.scenarios import build_scenario, run_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description="tail CE^2 versus horizon")
    ap.add_argument("--kind", default="same-topology")
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(10)))
    ap.add_argument("--horizons", type=float, nargs="+", default=[100.0, 150.0, 200.0, 300.0, 400.0])
    ap.add_argument("--k", type=float, nargs="+", default=[100.0])
    args = ap.parse_args()

    slow, _ = exact_cancellation_rates(0.01)
    print(f"slow error eigenvalue {slow:.5f}; CE^2 decays like exp({2 * slow:.4f} t)")
    for k in args.k:
        print(f"\nk = {k:g}")
        print(f"{'t_end':>7s} {'median':>10s} {'max':>10s} {'seeds < 1e-2':>13s}")
        for t_end in args.horizons:
            vals = np.array([run_scenario(build_scenario(args.kind, {"t_end": t_end, "k": k}, s))[1].steady_ce2_mean
                             for s in args.seeds])
            print(f"{t_end:7g} {np.median(vals):10.3e} {vals.max():10.3e} {np.sum(vals < 1e-2):>8d}/{vals.size}")


if __name__ == "__main__":
    main()
