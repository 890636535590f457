"""Search (d, F, n_t, f) for the design with the fewest signal passes.

    python scripts/design_search.py --bandwidth-khz 500 --pareto pareto.csv
"""

import argparse

import numpy as np

from afcxpm.errors import InfeasibleError
from afcxpm.feasibility import SearchRanges, minimal_passes


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bandwidth-khz", type=float, default=500.0)
    ap.add_argument("--gamma-khz", type=float, default=9.0)
    ap.add_argument("--loss-budget", type=float, default=0.1)
    ap.add_argument("--pareto", default=None, help="optional CSV for the (m, atoms) front")
    args = ap.parse_args()

    ranges = SearchRanges(
        d=tuple(np.arange(5.0, 61.0, 5.0)),
        finesse=tuple(np.round(np.arange(2.0, 6.01, 0.2), 2)),
        n_teeth=tuple(range(20, 301, 10)),
        f=(2.0, 3.0, 4.0),
    )
    try:
        res = minimal_passes(ranges, args.bandwidth_khz * 1e3, args.loss_budget, args.gamma_khz * 1e3)
    except InfeasibleError as exc:
        raise SystemExit(str(exc))
    p, rep = res.best, res.report
    print(f"evaluated {res.evaluated} points, {len(res.feasible)} feasible")
    print(f"best: m={p.m} d={p.d:g} F={p.finesse:g} n_t={p.n_teeth} f={p.f:g}")
    print(f"      eta={rep.eta:.4f} zetaL={rep.zeta_l:.4f} sensitivity={rep.sensitivity:.3f}")
    for k, c in rep.conditions.items():
        print(f"      {k:<26} bound {c.bound:12.5g} {'ok' if c.satisfied else 'FAIL'}")
    if args.pareto:
        with open(args.pareto, "w") as fh:
            fh.write(res.pareto_csv())


if __name__ == "__main__":
    main()
