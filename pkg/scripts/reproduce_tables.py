"""Monte-Carlo SER tables for BPSK, 8-PSK and 16-PSK on square channels.

    python scripts/reproduce_tables.py --trials 100 --out results/
"""
import argparse
from pathlib import Path

from rsqp_mimo.bench_cli import ExperimentConfig, emit_csv, emit_plot_data, run_experiment

TABLES = {
    "bpsk": dict(grid=[(32, 32, 2), (64, 64, 2)], snrs=list(range(12, 23, 2))),
    "8psk": dict(grid=[(32, 32, 8), (64, 64, 8), (128, 128, 8)], snrs=list(range(12, 23, 2))),
    "16psk": dict(grid=[(64, 64, 16), (128, 128, 16)], snrs=list(range(16, 27, 2))),
}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--tables", nargs="+", default=list(TABLES), choices=list(TABLES))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", default="results")
    a = p.parse_args()
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in a.tables:
        cfg = ExperimentConfig(**TABLES[name], trials=a.trials, detectors=["pnqp", "mmse", "gpm"],
                               base_seed=a.base_seed, parallelism=a.parallelism)
        rows = run_experiment(cfg)
        emit_csv(rows, out / f"{name}.csv")
        emit_plot_data(rows, out / name)
        print(f"{name}: wrote {len(rows)} rows to {out / f'{name}.csv'}")


if __name__ == "__main__":
    main()
