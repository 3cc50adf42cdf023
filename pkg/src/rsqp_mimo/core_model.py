"""M-PSK constellation arithmetic, channel instances and the SER metric."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidModulationError(ValueError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class PskConstellation:
    M: int
    symbols: np.ndarray = field(repr=False)

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.M) / self.M

    @property
    def alpha(self) -> np.ndarray:
        return self.symbols.real.copy()

    @property
    def beta(self) -> np.ndarray:
        return self.symbols.imag.copy()


def psk_constellation(M: int) -> PskConstellation:
    """Symbols exp(i*2*pi*k/M), k = 0..M-1, in index order."""
    if int(M) != M or M < 2:
        raise InvalidModulationError(f"modulation order must be an integer >= 2, got {M!r}")
    M = int(M)
    theta = 2.0 * np.pi * np.arange(M) / M
    # cos/sin rather than exp so that e.g. symbols[M/4] is exactly (0, 1) up to cos roundoff
    symbols = np.cos(theta) + 1j * np.sin(theta)
    symbols.setflags(write=False)
    return PskConstellation(M=M, symbols=symbols)


def psk_indices(x, M: int) -> np.ndarray:
    """Nearest-symbol constellation index for every entry of ``x``.

    Angle quantization round(angle * M / 2pi) mod M. Exact zeros map to index 0.
    """
    x = np.asarray(x, dtype=complex)
    if M < 2:
        raise InvalidModulationError(f"modulation order must be >= 2, got {M}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite entries")
    u = np.angle(x) * M / (2.0 * np.pi)
    lo = np.floor(u)
    frac = u - lo
    lo = lo.astype(np.int64)
    k = np.where(frac > 0.5, lo + 1, lo) % M
    tie = np.abs(frac - 0.5) < 1e-12
    k = np.where(tie, np.minimum(lo % M, (lo + 1) % M), k)
    k[x == 0] = 0
    return k


def project_to_psk(x, M: int) -> np.ndarray:
    """Nearest M-PSK symbol per entry (ties -> smallest constellation index)."""
    return psk_constellation(M).symbols[psk_indices(x, M)]


def symbol_indices(x, M: int, tol: float = 1e-9) -> np.ndarray:
    """Constellation indices of a vector that must already be PSK-valued."""
    x = np.asarray(x, dtype=complex)
    k = psk_indices(x, M)
    err = np.abs(x - psk_constellation(M).symbols[k])
    if np.any(err > tol):
        bad = int(np.argmax(err))
        raise ValueError(f"entry {bad} ({x[bad]}) is not a {M}-PSK symbol")
    return k


def symbol_error_rate(x_hat, x_star, M: int | None = None) -> float:
    """Fraction of entries whose constellation index differs.

    If ``M`` is omitted it is inferred as the smallest order among 2..1024
    that represents both vectors.
    """
    x_hat = np.atleast_1d(np.asarray(x_hat, dtype=complex))
    x_star = np.atleast_1d(np.asarray(x_star, dtype=complex))
    if x_hat.shape != x_star.shape or x_hat.ndim != 1 or x_hat.size == 0:
        raise DimensionError(f"shape mismatch: {x_hat.shape} vs {x_star.shape}")
    if M is None:
        M = _infer_order(np.concatenate([x_hat, x_star]))
    a = symbol_indices(x_hat, M)
    b = symbol_indices(x_star, M)
    return float(np.count_nonzero(a != b)) / a.size


def _infer_order(x: np.ndarray) -> int:
    M = 2
    while M <= 1024:
        k = psk_indices(x, M)
        if np.all(np.abs(x - psk_constellation(M).symbols[k]) <= 1e-9):
            return M
        M *= 2
    raise ValueError("vector is not PSK-valued for any power-of-two order <= 1024")


@dataclass(frozen=True)
class ChannelInstance:
    """One draw of r = H x* + v."""

    H: np.ndarray
    x_star: np.ndarray
    v: np.ndarray
    r: np.ndarray
    M: int
    sigma2: float
    snr_db: float = float("nan")
    seed: int | None = None

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
            raise DimensionError(f"H must be a non-empty matrix, got shape {H.shape}")
        if self.x_star.shape != (H.shape[1],) or self.v.shape != (H.shape[0],) or self.r.shape != (H.shape[0],):
            raise DimensionError("x_star, v, r do not match H")
        psk_constellation(self.M)

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def k_star(self) -> np.ndarray:
        return symbol_indices(self.x_star, self.M)

    def objective(self, x) -> float:
        """F(x) = ||Hx - r||^2."""
        res = self.H @ np.asarray(x, dtype=complex) - self.r
        return float(np.vdot(res, res).real)


def make_instance(H, x_star, v, M: int, sigma2: float = 0.0, **kw) -> ChannelInstance:
    """Build an instance from explicit data, computing r = H x* + v."""
    H = np.asarray(H, dtype=complex)
    if H.ndim == 1:
        H = H.reshape(-1, 1)
    x_star = np.atleast_1d(np.asarray(x_star, dtype=complex))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if x_star.shape != (H.shape[1],) or v.shape != (H.shape[0],):
        raise DimensionError(f"H is {H.shape}, x_star {x_star.shape}, v {v.shape}")
    return ChannelInstance(H=H, x_star=x_star, v=v, r=H @ x_star + v, M=M, sigma2=sigma2, **kw)
