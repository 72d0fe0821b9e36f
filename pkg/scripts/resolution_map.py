"""Relative error of the mode-0 kernel against the half-disc closed form on a grid.

Uses the flat-fiber configuration (phi == 0), where the exact kernel is
known. Cells marked * lie outside the sector the engine reports as resolved.

    python scripts/resolution_map.py --dmax 20
"""

import argparse
import math

import numpy as np

from flatlab.hartogs import EngineConfig, build_kernel, half_disc_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dmax", type=int, default=20)
    ap.add_argument("--plain", action="store_true", help="monomials only, no rational edge functions")
    args = ap.parse_args()
    kern = build_kernel(
        config=EngineConfig(dmax=args.dmax, kmax=2, rational=not args.plain), flat_fiber=True
    )
    space = kern.spaces[0]
    xs = [-0.5, -0.2, -0.1, -0.05, -0.02, -0.01, -1e-3, -1e-6, -1e-9]
    ys = [0.0, 0.01, 0.03, 0.1, 0.3, 0.6]
    print("Re z1 \\ Im z1 " + "".join(f"{y:>10g}" for y in ys))
    for x in xs:
        cells = []
        for y in ys:
            z = complex(x, y)
            if abs(z) >= 0.95:
                cells.append(f"{'':>10}")
                continue
            ref = half_disc_kernel(z).real / math.pi
            err = abs(space.diagonal(z) - ref) / ref
            mark = " " if kern.resolved(z) else "*"
            cells.append(f"{err:9.1e}{mark}")
        print(f"{x:>13g} " + "".join(cells))
    print(f"basis size {space.nbasis}, rank {space.rank}, condition {space.condition:.2e}")
    print(f"degree diagnostic {kern.diagnostics.get('degree_delta', float('nan')):.2e}")


if __name__ == "__main__":
    main()
