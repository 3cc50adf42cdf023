"""Gradient-guided rounding of a relaxed assignment vector to a one-hot one."""
from __future__ import annotations

import numpy as np

from .formulation import AssignmentForm, f_grad


class PreconditionError(ValueError):
    pass


def round_gradient_guided(form: AssignmentForm, t0, normalize: bool = True) -> np.ndarray:
    """Sweep blocks j = 1..n; set block j to the vertex with the smallest
    block gradient evaluated at the current (partly rounded) point.

    Since f is affine in each block, the block gradient does not depend on the
    block itself, so one incremental update of y = Qo z + c per block suffices.
    With ``normalize`` each block with positive mass is rescaled to sum 1 first
    (negative entries clamped to zero); an exactly feasible input is unchanged.
    """
    n, M = form.n, form.M
    t = np.clip(np.asarray(t0, dtype=float), 0.0, None).reshape(n, M).copy()
    if normalize:
        s = t.sum(axis=1)
        pos = s > 0
        t[pos] /= s[pos, None]
    sym = form.symbols
    conj_sym = np.conj(sym)
    z = t @ sym
    y = form.Qo @ z + form.c
    k = np.empty(n, dtype=np.int64)
    for j in range(n):
        g = 2.0 * (conj_sym * y[j]).real
        kj = int(np.argmin(g))
        k[j] = kj
        dz = sym[kj] - z[j]
        if dz != 0:
            y += form.Qo[:, j] * dz
            z[j] = sym[kj]
    out = np.zeros((n, M))
    out[np.arange(n), k] = 1.0
    return out.ravel()


def round_any_support(t0, M: int) -> np.ndarray:
    """Pick the first positive entry of each block (test oracle only)."""
    t = np.asarray(t0, dtype=float).reshape(-1, M)
    k = np.argmax(t > 0, axis=1)
    out = np.zeros_like(t)
    out[np.arange(t.shape[0]), k] = 1.0
    return out.ravel()


def is_stationary(form: AssignmentForm, t, tol: float = 1e-6) -> bool:
    """KKT test for min f over the product of simplices.

    Per block: the gradient is constant (within tol) on the positive entries,
    and no zero entry has a gradient below that level minus tol.
    """
    t = np.asarray(t, dtype=float)
    tb = form.blocks(t)
    if np.any(t < -tol) or np.any(np.abs(tb.sum(axis=1) - 1.0) > tol):
        raise PreconditionError("t is not feasible for the block-simplex problem within tol")
    g = form.blocks(f_grad(form, t))
    for tj, gj in zip(tb, g):
        supp = tj > tol
        if not np.any(supp):
            return False
        level = gj[supp].min()
        if gj[supp].max() - level > tol:
            return False
        if np.any(gj[~supp] < level - tol):
            return False
    return True
