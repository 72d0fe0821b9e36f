"""Bergman invariants from the numerical Hartogs kernel along the inner normal.

Prints J/J_model, Ricci, scalar curvature and the Kobayashi-Fuks ratio at
d = e^log_d for each log_d, with the model values 2 pi^2 * 2, -1, -2, 1 as
targets (n = m = 1). Convergence is logarithmic in d, so the ratios drift
toward 1 slowly; the point is the direction of the drift.

    python scripts/kernel_trend.py --log-d -6 -10 -14 -20 --dmax 20
"""

import argparse
import math

from flatlab.config import parse_config
from flatlab.harness import KERNEL_LOG_D_MIN, run_sweep, trend


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--log-d", type=float, nargs="+", default=[-6, -10, -14, -20])
    ap.add_argument("--dmax", type=int, default=20)
    ap.add_argument("--kmax", type=int, default=2)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()
    if min(args.log_d) < KERNEL_LOG_D_MIN:
        ap.error(f"log d below {KERNEL_LOG_D_MIN} is outside the kernel regime")
    cfg = parse_config(
        {
            "name": "kernel-trend-script",
            "domain": {"kind": "hartogs", "n": 1, "m": args.m},
            "curve": {"schedule": "normal"},
            "grid": {"log_d": sorted(args.log_d, reverse=True), "xi": [["1", "0"], ["0", "1"]]},
            "quantities": ["J", "R", "S", "MF", "kernel"],
            "engine": {"dmax": args.dmax, "kmax": args.kmax},
            "output": {"csv": args.csv} if args.csv else {},
        }
    )
    res = run_sweep(cfg, write=bool(args.csv))
    print(f"{'log d':>7} {'xi':>9} {'J_ratio':>10} {'R':>10} {'S':>10} {'MF_ratio':>10} {'tail':>9}")
    for r in res.rows:
        if r["error"]:
            print(f"{r['log_d']:7.1f} error: {r['error']}")
            continue
        print(
            f"{r['log_d']:7.1f} {r['xi']:>9} {r['J_ratio']:10.6f} {r['R_value']:10.6f} "
            f"{r['S_value']:10.6f} {r['MF_ratio']:10.6f} {r['kernel_tail']:9.1e}"
        )
    normal = [r["J_ratio"] for r in res.rows if r["xi"].startswith("1") and not r["error"]]
    tr = trend(normal, 1.0)
    print(f"J_ratio trend toward 1: {tr['toward']}, within 2% band: {tr['in_band']}")
    print(f"model J = {2 * math.pi**2 * 2:.6f}")


if __name__ == "__main__":
    main()
