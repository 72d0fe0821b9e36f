"""Kobayashi squeeze brackets along the inner normal and a slanted cone curve.

For each (epsilon, delta) rung and depth log d, prints the bracket of
M^K / center, where center is the product-domain value at the scaled point.
The bracket must contain 1 and shrink as epsilon, delta -> 0 and d -> 0.

    python scripts/bracket_ladder.py --m 1 --schedule normal
"""

import argparse

from flatlab.config import parse_config
from flatlab.harness import run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--schedule", choices=("normal", "default"), default="normal")
    ap.add_argument("--log-d", type=float, nargs="+", default=[-60, -100, -200, -400])
    ap.add_argument("--samples", type=int, default=10_000)
    args = ap.parse_args()
    rungs = [(0.3, 0.2), (0.2, 0.1), (0.1, 0.05), (0.05, 0.02)]
    cfg = parse_config(
        {
            "name": "bracket-ladder",
            "domain": {"kind": "hartogs", "n": 1, "m": args.m},
            "curve": {"schedule": args.schedule, "alpha": 1.0, "N": 2.0},
            "grid": {
                "log_d": sorted(args.log_d, reverse=True),
                "epsilon": sorted({e for e, _ in rungs}),
                "delta": sorted({d for _, d in rungs}),
                "xi": [["1", "0"]],
            },
            "quantities": ["MK"],
            "samples": args.samples,
        }
    )
    rows = {(r["epsilon"], r["delta"], r["log_d"]): r for r in run_sweep(cfg, write=False).rows}
    print(f"{'eps':>5} {'delta':>6} " + "".join(f"{'log d = ' + format(x, 'g'):>24}" for x in cfg.log_d))
    for eps, delta in rungs:
        cells = []
        for log_d in cfg.log_d:
            r = rows[(eps, delta, log_d)]
            if r["MK_lower_ratio"] is None:
                cells.append(f"{(r['error'] or 'n/a')[:22]:>24}")
            else:
                cells.append(f"{'[%.4f, %.4f]' % (r['MK_lower_ratio'], r['MK_upper_ratio']):>24}")
        print(f"{eps:5.2f} {delta:6.2f} " + "".join(cells))


if __name__ == "__main__":
    main()
