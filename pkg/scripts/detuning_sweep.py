"""Phase-versus-photon-number slopes across signal detunings.

    python scripts/detuning_sweep.py --reps 200 --seed 3
"""

import argparse

from afcxpm import measurement
from afcxpm.material import TWO_PI
from afcxpm.measurement import NoiseModel, ReadoutModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--noiseless", action="store_true")
    args = ap.parse_args()

    noise = NoiseModel.noiseless() if args.noiseless else NoiseModel(seed=args.seed)
    dets = [TWO_PI * f * 1e6 for f in measurement.DEFAULT_SWEEP_MHZ]
    rows = measurement.detuning_sweep(dets, measurement.DEFAULT_PHOTON_LEVELS, args.reps, ReadoutModel(noise=noise))
    print(f"{'MHz':>7} {'slope':>12} {'err':>10} {'analytic':>12} {'pull':>6}")
    for r in rows:
        pull = (r.slope - r.analytic) / r.slope_err if r.slope_err > 0 else 0.0
        print(f"{r.detuning / TWO_PI / 1e6:7.1f} {r.slope:12.4e} {r.slope_err:10.2e} {r.analytic:12.4e} {pull:6.2f}")


if __name__ == "__main__":
    main()
