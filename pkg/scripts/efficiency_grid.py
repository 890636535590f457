"""Compare solver echo efficiency with the closed form over a (d, F) grid.

    python scripts/efficiency_grid.py --z-slices 64
"""

import argparse
import time

from afcxpm import afc, dynamics
from afcxpm.material import TWO_PI, preset
from afcxpm.spectrum import CombParams, build_feature


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--z-slices", type=int, default=64)
    ap.add_argument("--d", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0])
    ap.add_argument("--finesse", type=float, nargs="+", default=[3.0, 4.0, 6.0])
    args = ap.parse_args()

    params = preset("tm_linbo3")
    cfg = dynamics.SolverConfig(z_slices=args.z_slices)
    print(f"{'d':>6} {'F':>5} {'numeric':>10} {'closed':>10} {'rel':>8} {'s':>6}")
    for fin in args.finesse:
        for d in args.d:
            comb = CombParams.from_effective_od(d, fin, delta_m=TWO_PI * 5.5e6, n_teeth=18)
            t0 = time.perf_counter()
            eff = dynamics.run_echo(build_feature(comb), params, config=cfg).efficiency
            eta = afc.recall_efficiency(d, fin)
            print(f"{d:6.2f} {fin:5.1f} {eff:10.6f} {eta:10.6f} {eff / eta - 1:+8.2%} {time.perf_counter() - t0:6.1f}")


if __name__ == "__main__":
    main()
