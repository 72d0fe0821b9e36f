"""Run every sweep config (or the ones given) and print a one-line summary each.

    python scripts/run_sweeps.py                 # all of configs/*.toml
    python scripts/run_sweeps.py configs/hartogs-normal.toml
"""

import argparse
import sys
import time
from pathlib import Path

from flatlab.config import load_config
from flatlab.harness import run_sweep

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("configs", nargs="*", type=Path)
    ap.add_argument("--skip-kernel", action="store_true", help="skip configs that build the numerical kernel")
    args = ap.parse_args()
    paths = args.configs or sorted((ROOT / "configs").glob("*.toml"))
    failed = 0
    for path in paths:
        cfg = load_config(path)
        if args.skip_kernel and set(cfg.quantities) & {"J", "R", "S", "MF", "kernel"} and cfg.domain_kind == "hartogs":
            print(f"{cfg.name:>18}: skipped (kernel)")
            continue
        t0 = time.perf_counter()
        res = run_sweep(cfg)
        s = res.summary
        failed += s["errors"]
        print(
            f"{cfg.name:>18}: {s['rows']:4d} rows  {s['errors']:3d} errors  "
            f"{s['certified_rows']:4d} certified  bracket contains 1: {s['bracket_contains_one']}  "
            f"ladder: {s['ladder_tightening']}  ({time.perf_counter() - t0:.1f} s) -> {cfg.csv_path}"
        )
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
