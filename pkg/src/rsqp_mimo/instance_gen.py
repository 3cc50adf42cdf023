"""Random i.i.d. Rayleigh instances and the SNR convention SNR = 10 log10(n / sigma^2).

Stream layout of the Philox generator seeded with ``seed``: H (real parts then
imaginary parts, each m*n row-major), then v (m real, m imaginary), then the
n symbol indices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core_model import ChannelInstance, psk_constellation


@dataclass(frozen=True)
class GenSpec:
    m: int
    n: int
    M: int
    snr_db: float
    seed: int = 0
    noiseless: bool = False

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"dimensions must be positive, got m={self.m}, n={self.n}")
        if self.M < 2:
            raise ValueError(f"modulation order must be >= 2, got {self.M}")
        if not self.noiseless and not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite (use noiseless=True for v = 0)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


def sigma2_from_snr(n: int, snr_db: float) -> float:
    return n / 10.0 ** (snr_db / 10.0)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def trial_seed(*keys: int) -> int:
    """Deterministic 64-bit seed mixed from integer keys (base seed, grid index, ...)."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def generate_instance(cfg: GenSpec) -> ChannelInstance:
    m, n, M = cfg.m, cfg.n, cfg.M
    rng = rng_for(cfg.seed)
    s = math.sqrt(0.5)
    Hri = rng.standard_normal((2, m, n))
    H = s * (Hri[0] + 1j * Hri[1])
    vri = rng.standard_normal((2, m))
    k = rng.integers(0, M, size=n)

    if cfg.noiseless:
        sigma2 = 0.0
        v = np.zeros(m, dtype=complex)
    else:
        sigma2 = sigma2_from_snr(n, cfg.snr_db)
        v = math.sqrt(sigma2) * s * (vri[0] + 1j * vri[1])
    x = psk_constellation(M).symbols[k]
    return ChannelInstance(
        H=H, x_star=x, v=v, r=H @ x + v, M=M, sigma2=sigma2,
        snr_db=math.inf if cfg.noiseless else float(cfg.snr_db), seed=cfg.seed,
    )


def _fmt(a: float) -> str:
    return repr(float(a))


def write_instance(inst: ChannelInstance, path) -> None:
    """Plain-text instance file.

    Line 1: ``m n M snr_db seed``; then m rows of H as interleaved re/im pairs;
    one line of the n symbol indices of x*; m lines ``re im`` of v.  ``r`` is
    recomputed on load, so it is not stored.
    """
    seed = -1 if inst.seed is None else inst.seed
    lines = [f"{inst.m} {inst.n} {inst.M} {_fmt(inst.snr_db)} {seed}"]
    for row in inst.H:
        lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in row))
    lines.append(" ".join(str(int(k)) for k in inst.k_star))
    lines.extend(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in inst.v)
    Path(path).write_text("\n".join(lines) + "\n")


def read_instance(path) -> ChannelInstance:
    rows = Path(path).read_text().split("\n")
    head = rows[0].split()
    m, n, M = int(head[0]), int(head[1]), int(head[2])
    snr_db, seed = float(head[3]), int(head[4])
    H = np.empty((m, n), dtype=complex)
    for i in range(m):
        vals = np.array(rows[1 + i].split(), dtype=float)
        if vals.size != 2 * n:
            raise ValueError(f"row {i} of H has {vals.size} numbers, expected {2 * n}")
        H[i] = vals[0::2] + 1j * vals[1::2]
    k = np.array(rows[1 + m].split(), dtype=np.int64)
    if k.size != n or np.any((k < 0) | (k >= M)):
        raise ValueError("bad symbol index line")
    v = np.empty(m, dtype=complex)
    for i in range(m):
        re, im = rows[2 + m + i].split()
        v[i] = float(re) + 1j * float(im)
    x = psk_constellation(M).symbols[k]
    sigma2 = 0.0 if math.isinf(snr_db) else sigma2_from_snr(n, snr_db)
    return ChannelInstance(H=H, x_star=x, v=v, r=H @ x + v, M=M, sigma2=sigma2,
                           snr_db=snr_db, seed=None if seed < 0 else seed)
