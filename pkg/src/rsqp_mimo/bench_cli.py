"""Monte-Carlo benchmark harness and command-line entry point.

Subcommands::

    generate    write one random instance to a text file
    detect      run one detector on an instance file, print key=value lines
    bench       sweep a (m, n, M) x SNR grid and write a CSV table
    conditions  evaluate the two recovery conditions on an instance file

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detectors import CapacityError, DetectorKind, detect
from .instance_gen import GenSpec, generate_instance, read_instance, trial_seed, write_instance
from .pnqp import SolverConfig, write_trace_csv
from .tightness import check_cond_exact_detection, check_cond_tightness

CSV_HEADER = ["m", "n", "M", "snr_db", "detector", "mean_ser", "mean_time_s", "trials", "failures"]
MISSING = "---"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    grid: list[tuple[int, int, int]]
    snrs: list[float]
    trials: int = 100
    detectors: list[str] = field(default_factory=lambda: ["pnqp"])
    solver: dict = field(default_factory=dict)
    base_seed: int = 0
    output: str | None = None
    parallelism: int = 1
    time_budget_s: float = 60.0

    def __post_init__(self):
        self.grid = [tuple(int(v) for v in g) for g in self.grid]
        self.snrs = [float(s) for s in self.snrs]
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.grid or not self.snrs:
            raise ConfigError("grid and snrs must be non-empty")
        for g in self.grid:
            if len(g) != 3:
                raise ConfigError(f"grid entries are (m, n, M) triples, got {g}")
            try:
                GenSpec(*g, snr_db=0.0)
            except ValueError as err:
                raise ConfigError(f"bad grid entry {g}: {err}") from err
        if any(not math.isfinite(s) for s in self.snrs):
            raise ConfigError("snrs must be finite")
        try:
            self.detectors = [DetectorKind(d).value for d in self.detectors]
        except ValueError as err:
            raise ConfigError(str(err)) from err
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed must fit in 64 unsigned bits")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if not self.time_budget_s > 0:
            raise ConfigError("time_budget_s must be > 0")
        self.solver_config()

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(**self.solver)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad solver settings: {err}") from err

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as err:
            raise ConfigError(str(err)) from err


@dataclass(frozen=True)
class ResultRow:
    m: int
    n: int
    M: int
    snr_db: float
    detector: str
    mean_ser: float | None
    mean_time_s: float | None
    trials: int
    failures: int


def _run_trial(args):
    """One instance, every requested detector.  Returns {detector: (ser, time) or None}."""
    (m, n, M), snr, seed, detectors, solver, budget = args
    inst = generate_instance(GenSpec(m, n, M, snr, seed=seed))
    out = {}
    for name in detectors:
        t0 = time.perf_counter()
        try:
            res = detect(name, inst, solver=solver)
        except (CapacityError, FloatingPointError):
            out[name] = None
            continue
        elapsed = time.perf_counter() - t0
        # an overrun is a failure for the cell, matching a hard time limit
        out[name] = None if elapsed > budget else (float(res.ser), elapsed)
    return out


def _tasks(config: ExperimentConfig):
    solver = config.solver_config()
    for gi, g in enumerate(config.grid):
        for si, snr in enumerate(config.snrs):
            for ti in range(config.trials):
                seed = trial_seed(config.base_seed, gi, si, ti)
                yield (gi, si), (g, snr, seed, config.detectors, solver, config.time_budget_s)


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    keys, tasks = zip(*_tasks(config))
    if config.parallelism > 1:
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=4))
    else:
        results = [_run_trial(t) for t in tasks]

    acc: dict = {}
    for key, res in zip(keys, results):
        for name, val in res.items():
            acc.setdefault((key, name), []).append(val)

    rows = []
    for gi, (m, n, M) in enumerate(config.grid):
        for si, snr in enumerate(config.snrs):
            for name in config.detectors:
                vals = acc[((gi, si), name)]
                ok = [v for v in vals if v is not None]
                rows.append(ResultRow(
                    m=m, n=n, M=M, snr_db=snr, detector=name,
                    mean_ser=float(np.mean([v[0] for v in ok])) if ok else None,
                    mean_time_s=float(np.mean([v[1] for v in ok])) if ok else None,
                    trials=len(vals), failures=len(vals) - len(ok),
                ))
    return sort_rows(rows, config.grid)


def sort_rows(rows, grid=None):
    """Grid order (as given, else by first appearance), SNR descending, detector name."""
    order = {}
    for g in grid or [(r.m, r.n, r.M) for r in rows]:
        order.setdefault(tuple(g), len(order))
    return sorted(rows, key=lambda r: (order.get((r.m, r.n, r.M), len(order)), -r.snr_db, r.detector))


def _fmt_opt(v, fmt):
    return MISSING if v is None else format(v, fmt)


def emit_csv(rows, path) -> None:
    """Write rows in stable order; ``path`` may also be an open text stream."""
    if hasattr(path, "write"):
        _write_rows(rows, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(rows, fh)


def _write_rows(rows, fh) -> None:
    wr = csv.writer(fh)
    wr.writerow(CSV_HEADER)
    for r in sort_rows(list(rows)):
        wr.writerow([r.m, r.n, r.M, repr(float(r.snr_db)), r.detector,
                     _fmt_opt(r.mean_ser, ".6f"), _fmt_opt(r.mean_time_s, ".6f"),
                     r.trials, r.failures])


def read_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected header {rd.fieldnames}")
        for d in rd:
            rows.append(ResultRow(
                m=int(d["m"]), n=int(d["n"]), M=int(d["M"]), snr_db=float(d["snr_db"]),
                detector=d["detector"],
                mean_ser=None if d["mean_ser"] == MISSING else float(d["mean_ser"]),
                mean_time_s=None if d["mean_time_s"] == MISSING else float(d["mean_time_s"]),
                trials=int(d["trials"]), failures=int(d["failures"]),
            ))
    return rows


def emit_plot_data(rows, directory) -> list[Path]:
    """One whitespace-separated ``snr_db ser`` file per (m, n, M, detector), SNR ascending."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    series: dict = {}
    for r in rows:
        if r.mean_ser is not None:
            series.setdefault((r.m, r.n, r.M, r.detector), []).append((r.snr_db, r.mean_ser))
    paths = []
    for (m, n, M, det), pts in series.items():
        p = directory / f"ser_m{m}_n{n}_M{M}_{det}.dat"
        p.write_text("# snr_db ser\n" + "".join(f"{s:g} {e:.6f}\n" for s, e in sorted(pts)))
        paths.append(p)
    return paths


# command line

def _parse_kv(items) -> dict:
    """``key=value`` strings to a dict; values parsed as JSON when possible."""
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _parse_triple(s: str):
    parts = s.replace("x", ",").split(",")
    if len(parts) != 3:
        raise ConfigError(f"grid entries look like 32,32,8; got {s!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError as err:
        raise ConfigError(f"bad grid entry {s!r}") from err


def _cmd_generate(a) -> int:
    try:
        inst = generate_instance(GenSpec(a.m, a.n, a.M, 0.0 if a.noiseless else a.snr,
                                         seed=a.seed, noiseless=a.noiseless))
    except ValueError as err:
        raise ConfigError(str(err)) from err
    write_instance(inst, a.output)
    return 0


def _load(path):
    try:
        return read_instance(path)
    except (ValueError, IndexError) as err:
        raise OSError(f"malformed instance file {path}: {err}") from err


def _solver(items, **extra) -> SolverConfig:
    try:
        return SolverConfig(**{**_parse_kv(items), **extra})
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad solver settings: {err}") from err


def _cmd_detect(a) -> int:
    inst = _load(a.instance)
    solver = _solver(a.solver, trace=bool(a.trace_csv))
    kind = DetectorKind(a.detector)
    res = detect(kind, inst, solver)
    print("\n".join(res.as_lines()))
    if a.trace_csv:
        write_trace_csv(res.trace, a.trace_csv)
    return 0


def _cmd_conditions(a) -> int:
    inst = _load(a.instance)
    for rep in (check_cond_tightness(inst.H, inst.v, inst.M),
                check_cond_exact_detection(inst.H, inst.v, inst.M)):
        print(rep.as_line())
    return 0


def _cmd_bench(a) -> int:
    d = {}
    if a.config:
        d = json.loads(Path(a.config).read_text())
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a JSON object")
    if a.grid:
        d["grid"] = [_parse_triple(g) for g in a.grid]
    for key in ("snrs", "trials", "detectors", "base_seed", "output", "parallelism", "time_budget_s"):
        val = getattr(a, key)
        if val is not None:
            d[key] = val
    if a.solver:
        d["solver"] = {**d.get("solver", {}), **_parse_kv(a.solver)}
    cfg = ExperimentConfig.from_dict(d)
    rows = run_experiment(cfg)
    emit_csv(rows, cfg.output or sys.stdout)
    if a.plot_dir:
        emit_plot_data(rows, a.plot_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsqp-mimo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--M", type=int, required=True)
    g.add_argument("--snr", type=float, default=20.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noiseless", action="store_true")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=_cmd_generate)

    d = sub.add_parser("detect", help="run a detector on an instance file")
    d.add_argument("instance")
    d.add_argument("--detector", default="pnqp", choices=[k.value for k in DetectorKind])
    d.add_argument("--solver", nargs="*", metavar="KEY=VALUE", help="SolverConfig overrides")
    d.add_argument("--trace-csv", help="write the outer-iteration trace (pnqp only)")
    d.set_defaults(func=_cmd_detect)

    b = sub.add_parser("bench", help="Monte-Carlo SER/time sweep")
    b.add_argument("--config", help="JSON file with ExperimentConfig fields")
    b.add_argument("--grid", nargs="+", metavar="m,n,M")
    b.add_argument("--snrs", nargs="+", type=float)
    b.add_argument("--trials", type=int)
    b.add_argument("--detectors", nargs="+")
    b.add_argument("--base-seed", dest="base_seed", type=int)
    b.add_argument("--output")
    b.add_argument("--parallelism", type=int)
    b.add_argument("--time-budget", dest="time_budget_s", type=float)
    b.add_argument("--solver", nargs="*", metavar="KEY=VALUE")
    b.add_argument("--plot-dir", help="also write per-detector (snr, ser) series here")
    b.set_defaults(func=_cmd_bench)

    c = sub.add_parser("conditions", help="check the recovery conditions")
    c.add_argument("instance")
    c.set_defaults(func=_cmd_conditions)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return a.func(a)
    except (ConfigError, json.JSONDecodeError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
