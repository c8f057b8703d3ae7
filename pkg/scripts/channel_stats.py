"""Delay statistics of CM1-CM4 over an ensemble of realizations."""

import argparse
import time

from mbuwb import channel_model as chm


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("-n", type=int, default=200, help="realizations per channel class")
    p.add_argument("--seed", type=int, default=10_000)
    args = p.parse_args()
    t0 = time.perf_counter()
    print("model  mean_excess_ns  rms_spread_ns  taps")
    for cm in chm.CM_PARAMS:
        reals = [chm.generate_realization(cm, args.seed + i) for i in range(args.n)]
        st = chm.ensemble_stats(reals)
        taps = sum(r.delays.size for r in reals) / len(reals)
        print(f"{cm:<6} {st.mean_excess_delay:>14.2f} {st.rms_delay_spread:>14.2f} {taps:>5.0f}")
    print(f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
