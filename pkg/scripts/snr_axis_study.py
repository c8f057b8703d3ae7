"""Hard/soft ordering of the fig5 users on the Es/N0 and Eb/N0 axes.

The two users run different MCSs, so their ordering at a given SNR depends
on which energy the axis normalises. Prints BER per user for both axes.
"""

import argparse

from mbuwb.harness.scenario import load_scenario
from mbuwb.harness.sweep import run_ber_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--realizations", type=int, default=1000)
    p.add_argument("--start", type=float, default=6.0)
    p.add_argument("--stop", type=float, default=12.0)
    p.add_argument("--seed", type=int, default=55)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cache", default="results/calibration")
    args = p.parse_args()
    for axis in ("esn0", "ebn0"):
        s = load_scenario("fig5").with_(snr_start=args.start, snr_stop=args.stop, snr_axis=axis,
                                        realizations=args.realizations, seed=args.seed)
        curves = run_ber_sweep(s, jobs=args.jobs, cache_dir=args.cache)
        print(f"axis {axis}: SNR " + " ".join(f"{x:>9g}" for x in s.snr_grid))
        for c in curves:
            print(f"  {c.label:<14}" + " ".join(f"{b:>9.2e}" for b in c.ber))


if __name__ == "__main__":
    main()
