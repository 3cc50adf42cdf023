"""Outer-iteration trace of PN-QP on a single instance (support size, penalty, residual)."""
import argparse

from rsqp_mimo import GenSpec, SolverConfig, generate_instance, pnqp_detect
from rsqp_mimo.pnqp import write_trace_csv


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--shape", default="4,4,8", help="m,n,M")
    p.add_argument("--snr", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default="trace.csv")
    a = p.parse_args()
    m, n, M = map(int, a.shape.split(","))
    inst = generate_instance(GenSpec(m, n, M, a.snr, seed=a.seed))
    res = pnqp_detect(inst, SolverConfig(trace=True))
    write_trace_csv(res.trace, a.csv)
    for row in res.trace:
        print(f"k={row['k']:2d} omega={row['omega']:9.1f} support={row['support_size']:4d} "
              f"penalty={row['penalty']:.3e} residual={row['residual']:.2e}")
    print(f"termination={res.termination} ser={res.ser:.4f} time={res.wall_time:.3f}s -> {a.csv}")


if __name__ == "__main__":
    main()
