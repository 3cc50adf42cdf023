"""Baseline and oracle detectors with a common ``detect(kind, instance)`` entry point."""
from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .core_model import ChannelInstance, project_to_psk, psk_constellation, psk_indices, symbol_error_rate
from .formulation import t_from_x
from .pnqp import DetectionResult, SolverConfig, pnqp_detect


class CapacityError(RuntimeError):
    pass


class DetectorKind(str, enum.Enum):
    pnqp = "pnqp"
    gpm = "gpm"
    mmse = "mmse"
    ml_bruteforce = "ml_bruteforce"
    lb = "lb"


def mmse_detect(instance: ChannelInstance):
    """Regularized linear estimate and its nearest-PSK projection.

    Returns ``(x_soft, x_hat)``.  With sigma^2 = 0 the pseudo-inverse is used.
    """
    H, r = instance.H, instance.r
    if instance.sigma2 > 0:
        A = H.conj().T @ H + instance.sigma2 * np.eye(instance.n)
        x_soft = np.linalg.solve(A, H.conj().T @ r)
    else:
        x_soft = np.linalg.pinv(H) @ r
    if not np.all(np.isfinite(x_soft)):
        raise FloatingPointError("MMSE solve produced non-finite values")
    return x_soft, project_to_psk(x_soft, instance.M)


def mmse_initial_t(instance: ChannelInstance) -> np.ndarray:
    return t_from_x(mmse_detect(instance)[1], instance.M)


@dataclass
class GpmOptions:
    step: float | None = None
    maxiter: int = 500
    power_iters: int = 20


def _lambda_max(Q: np.ndarray, iters: int) -> float:
    # deterministic start vector so the estimate is reproducible
    v = np.ones(Q.shape[0], dtype=complex) / np.sqrt(Q.shape[0])
    lam = 0.0
    for _ in range(iters):
        u = Q @ v
        lam = float(np.vdot(v, u).real)
        nu = np.linalg.norm(u)
        if nu == 0:
            return 0.0
        v = u / nu
    return max(lam, float(np.linalg.norm(Q @ v)))


def gpm_detect(instance: ChannelInstance, x0=None, opts: GpmOptions | None = None) -> DetectionResult:
    """Gradient step on ||Hx - r||^2 followed by projection onto the PSK set.

    Keeps the best iterate seen (x0 included); stops at a fixed point or the cap.
    Default start is the MMSE estimate, default step 1/(2 lambda_max(H^H H)).
    """
    opts = opts or GpmOptions()
    start = time.perf_counter()
    M = instance.M
    H, r = instance.H, instance.r
    Q = H.conj().T @ H
    c = -(H.conj().T @ r)
    x = mmse_detect(instance)[1] if x0 is None else np.asarray(x0, dtype=complex)
    k = psk_indices(x, M)
    x = psk_constellation(M).symbols[k]
    s = opts.step
    if s is None:
        lam = _lambda_max(Q, opts.power_iters)
        s = 1.0 / (2.0 * lam) if lam > 0 else 1.0
    best_x, best_F = x, instance.objective(x)
    it = 0
    for it in range(1, opts.maxiter + 1):
        grad = 2.0 * (Q @ x + c)
        k_new = psk_indices(x - s * grad, M)
        if np.array_equal(k_new, k):
            break
        k = k_new
        x = psk_constellation(M).symbols[k]
        F = instance.objective(x)
        if F < best_F:
            best_x, best_F = x, F
    return DetectionResult(
        x_hat=best_x, objective_P=best_F, ser=symbol_error_rate(best_x, instance.x_star, M),
        outer_iters=it, wall_time=time.perf_counter() - start, termination="fixed_point",
        detector="gpm",
    )


def ml_bruteforce(instance: ChannelInstance, cap: int = 2**24, chunk: int = 1 << 15) -> DetectionResult:
    """Exact minimizer of ||Hx - r||^2 by enumerating all M^n PSK vectors.

    Ties resolve to the lexicographically smallest index vector.
    """
    start = time.perf_counter()
    M, n = instance.M, instance.n
    if M ** n > cap:
        raise CapacityError(f"M^n = {M}^{n} exceeds the enumeration cap {cap}; use PN-QP instead")
    sym = psk_constellation(M).symbols
    H, r = instance.H, instance.r
    total = M ** n
    # index vector of candidate i is its base-M expansion, most significant digit first
    powers = M ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_val, best_i = np.inf, 0
    for lo in range(0, total, chunk):
        ids = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        digits = (ids[:, None] // powers[None, :]) % M
        R = sym[digits] @ H.T - r[None, :]
        vals = np.einsum("ij,ij->i", R.real, R.real) + np.einsum("ij,ij->i", R.imag, R.imag)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_i = float(vals[i]), int(ids[i])
    k = (best_i // powers) % M
    x = sym[k]
    return DetectionResult(
        x_hat=x, objective_P=instance.objective(x), ser=symbol_error_rate(x, instance.x_star, M),
        outer_iters=0, wall_time=time.perf_counter() - start, termination="exhaustive",
        detector="ml_bruteforce",
    )


def no_interference_lb(instance: ChannelInstance) -> float:
    """SER of per-symbol detection with all other symbols fixed to the truth."""
    return lb_detect(instance).ser


def lb_detect(instance: ChannelInstance) -> DetectionResult:
    start = time.perf_counter()
    H, x, v = instance.H, instance.x_star, instance.v
    # argmin_s ||h_j s - (h_j x_j + v)||^2 over |s| = 1 is the symbol nearest to h_j^H (h_j x_j + v)
    soft = np.sum(np.abs(H) ** 2, axis=0) * x + H.conj().T @ v
    x_hat = project_to_psk(soft, instance.M)
    return DetectionResult(
        x_hat=x_hat, objective_P=instance.objective(x_hat),
        ser=symbol_error_rate(x_hat, x, instance.M), wall_time=time.perf_counter() - start,
        termination="genie", detector="lb",
    )


def mmse_result(instance: ChannelInstance) -> DetectionResult:
    start = time.perf_counter()
    _, x_hat = mmse_detect(instance)
    return DetectionResult(
        x_hat=x_hat, objective_P=instance.objective(x_hat),
        ser=symbol_error_rate(x_hat, instance.x_star, instance.M),
        wall_time=time.perf_counter() - start, termination="closed_form", detector="mmse",
    )


def detect(kind, instance: ChannelInstance, solver: SolverConfig | None = None,
           gpm: GpmOptions | None = None) -> DetectionResult:
    kind = DetectorKind(kind)
    if kind is DetectorKind.pnqp:
        return pnqp_detect(instance, solver)
    if kind is DetectorKind.gpm:
        return gpm_detect(instance, None, gpm)
    if kind is DetectorKind.mmse:
        return mmse_result(instance)
    if kind is DetectorKind.ml_bruteforce:
        return ml_bruteforce(instance)
    return lb_detect(instance)


def enumerate_psk(n: int, M: int):
    """All M^n index vectors in lexicographic order (small n only)."""
    return itertools.product(range(M), repeat=n)
