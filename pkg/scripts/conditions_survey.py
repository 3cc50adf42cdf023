"""How often each recovery condition holds as the channel gets taller."""
import argparse

import numpy as np

from rsqp_mimo import GenSpec, generate_instance
from rsqp_mimo.instance_gen import trial_seed
from rsqp_mimo.tightness import check_cond_exact_detection, check_cond_tightness


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--M", type=int, default=8)
    p.add_argument("--snr", type=float, default=20.0)
    p.add_argument("--ratios", nargs="+", type=int, default=[1, 2, 4, 8, 16])
    p.add_argument("--trials", type=int, default=100)
    a = p.parse_args()
    print("m/n  unique_recovery  exact_detection")
    for r in a.ratios:
        u = e = 0
        for i in range(a.trials):
            inst = generate_instance(GenSpec(r * a.n, a.n, a.M, a.snr, seed=trial_seed(r, i)))
            u += check_cond_tightness(inst.H, inst.v, a.M).holds
            e += check_cond_exact_detection(inst.H, inst.v, a.M).holds
        print(f"{r:3d}  {u / a.trials:15.2f}  {e / a.trials:15.2f}")


if __name__ == "__main__":
    main()
