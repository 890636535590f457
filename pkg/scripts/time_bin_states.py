"""Probe phase and qubit error rates for time-bin signal states.

    python scripts/time_bin_states.py --photons 6.9e7 --zeta-l 0.05
"""

import argparse

from afcxpm import measurement
from afcxpm.material import TWO_PI
from afcxpm.measurement import NoiseModel, QubitAnalysis, ReadoutModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--photons", type=float, default=6.9e7)
    ap.add_argument("--detuning-mhz", type=float, default=100.0)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--zeta-l", type=float, default=0.0)
    ap.add_argument("--late-background", type=float, default=0.0)
    args = ap.parse_args()

    rows = measurement.time_bin_phase_experiment(
        args.photons,
        TWO_PI * args.detuning_mhz * 1e6,
        args.reps,
        ReadoutModel(noise=NoiseModel(seed=args.seed)),
        zeta_l=args.zeta_l,
        analysis=QubitAnalysis(late_background=args.late_background),
    )
    print(f"{'state':>6} {'model':>9} {'mean':>9} {'sem':>8} {'err off':>8} {'err on':>8}")
    for r in rows:
        print(
            f"{r.state:>6} {r.phase_true:9.5f} {r.phase_mean:9.5f} {r.phase_sem:8.5f} "
            f"{r.error_before:8.4f} {r.error_after:8.4f}"
        )


if __name__ == "__main__":
    main()
