"""Monte-Carlo std of the mean phase versus repetitions per experiment.

    python scripts/noise_scaling.py --trials 1000 --seed 1
"""

import argparse
import math

from afcxpm import measurement
from afcxpm.measurement import NoiseModel, ReadoutModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--detector-sigma", type=float, default=0.0)
    ap.add_argument("--reps", type=int, nargs="+", default=[25, 50, 100, 200, 400, 800])
    args = ap.parse_args()

    noise = NoiseModel(detector_sigma=args.detector_sigma, seed=args.seed)
    model = ReadoutModel(noise=noise)
    stds, slope = measurement.std_of_mean_scaling(args.reps, args.trials, model)
    sigma = noise.phase_sigma
    print(f"per-shot phase sigma {sigma * 1e3:.1f} mrad, correlation with reference {noise.correlation:.4f}")
    print(f"{'j':>6} {'std (mrad)':>11} {'sigma/sqrt(j)':>14}")
    for j, s in zip(args.reps, stds):
        print(f"{j:6d} {s * 1e3:11.3f} {sigma / math.sqrt(j) * 1e3:14.3f}")
    print(f"log-log slope {slope:.4f}")


if __name__ == "__main__":
    main()
