"""Quadratic-penalty outer loop with a projected-Newton inner solver (PN-QP).

Subproblem for penalty weight omega:

    min  f(t) + omega/2 * sum_j (1' t_j - 1)^2   s.t. 0 <= t <= K

The outer loop multiplies omega by rho until the eps-support of the iterate
stops changing and every block has exactly one entry above eps; the result is
then rounded block by block (see ``rounding``).
"""
from __future__ import annotations

import csv
import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core_model import ChannelInstance, symbol_error_rate
from .formulation import AssignmentForm, build_assignment_form, t_from_x, x_from_t
from .rounding import round_gradient_guided

INITS = ("uniform_te", "zero", "mmse")
TERMINATIONS = ("support_stable", "outer_cap", "inner_stall")
SCALINGS = ("hessian_diag", "none")


class NumericError(FloatingPointError):
    def __init__(self, msg, last_iterate=None):
        super().__init__(msg)
        self.last_iterate = last_iterate


@dataclass
class SolverConfig:
    omega0: float = 10.0
    rho: float = 3.0
    eps_support: float = 0.01
    tau: float = 0.01
    # geometric decay factor for tau_k; None keeps tau constant
    tau_decay: float | None = None
    K: float = 10.0
    maxiter_outer: int = 30
    maxiter_inner: int = 100
    armijo_sigma: float = 1e-4
    max_backtracks: int = 30
    active_eps: float = 1e-3
    newton_damping: float = 1e-8
    damping_cap: float = 1e8
    init: str = "uniform_te"
    # problems with nM above this use the matrix-free CG path
    dense_threshold: int = 4096
    cg_rtol: float = 0.1
    cg_maxiter: int = 250
    # "exact": 2 Gt + omega E; "majorizer": 2 G + omega E (PSD upper model of f)
    hessian: str = "exact"
    round_normalize: bool = True
    # "hessian_diag": divide F by 2 mean(q_jj) so the Hessian of F has unit mean
    # diagonal and omega is measured relative to it; "none" uses raw H, r
    objective_scale: str = "hessian_diag"
    trace: bool = False
    record_inner: bool = False

    def __post_init__(self):
        if not self.rho > 1:
            raise ValueError("rho must be > 1")
        if not self.omega0 > 0:
            raise ValueError("omega0 must be > 0")
        if not 0 < self.eps_support < 1:
            raise ValueError("eps_support must be in (0, 1)")
        if not self.K >= 1:
            raise ValueError("K must be >= 1")
        if self.tau <= 0:
            raise ValueError("tau must be > 0")
        if self.tau_decay is not None and not 0 < self.tau_decay < 1:
            raise ValueError("tau_decay must be in (0, 1)")
        if self.objective_scale not in SCALINGS:
            raise ValueError(f"objective_scale must be one of {SCALINGS}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}")

    def tau_at(self, k: int) -> float:
        """Inner tolerance for outer iteration k (1-based)."""
        if self.tau_decay is None:
            return self.tau
        return self.tau * self.tau_decay ** (k - 1)


@dataclass
class DetectionResult:
    x_hat: np.ndarray
    objective_P: float
    ser: float | None = None
    t_final: np.ndarray | None = None
    outer_iters: int = 0
    inner_iters_total: int = 0
    wall_time: float = 0.0
    termination: str = "support_stable"
    detector: str = "pnqp"
    trace: list = field(default_factory=list, repr=False)

    def as_lines(self) -> list[str]:
        xs = " ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in self.x_hat)
        return [
            f"detector={self.detector}",
            f"objective_P={self.objective_P:.17g}",
            f"ser={'nan' if self.ser is None else repr(self.ser)}",
            f"outer_iters={self.outer_iters}",
            f"inner_iters_total={self.inner_iters_total}",
            f"wall_time={self.wall_time:.6f}",
            f"termination={self.termination}",
            f"x_hat={xs}",
        ]


def project_box(t, K: float) -> np.ndarray:
    return np.clip(t, 0.0, K)


def penalty_value_grad(form: AssignmentForm, t, omega: float):
    t = np.asarray(t, dtype=float)
    z = form.to_complex(t)
    y = form.Qo @ z
    viol = form.block_sums(t) - 1.0
    val = float(np.vdot(z, y).real + 2.0 * np.vdot(form.c, z).real + 0.5 * omega * viol @ viol)
    grad = 2.0 * form.lift(y + form.c) + omega * np.repeat(viol, form.M)
    return val, grad


def kkt_residual(form: AssignmentForm, t, omega: float, K: float, grad=None) -> float:
    """|| t - P_B(t - grad f_omega(t)) ||_2."""
    if grad is None:
        _, grad = penalty_value_grad(form, t, omega)
    return float(np.linalg.norm(t - project_box(t - grad, K)))


def penalty_hessian_matvec(form: AssignmentForm, v, omega: float, majorizer: bool = False) -> np.ndarray:
    Gv = form.G_matvec(v) if majorizer else form.Gtilde_matvec(v)
    return 2.0 * Gv + omega * np.repeat(form.block_sums(v), form.M)


def dense_penalty_hessian(form: AssignmentForm, omega: float) -> np.ndarray:
    Hs = 2.0 * form.Gtilde
    M = form.M
    for j in range(form.n):
        Hs[j * M:(j + 1) * M, j * M:(j + 1) * M] += omega
    return Hs


@dataclass
class _InnerState:
    """Carried across the subproblems of one detect call."""

    lam: float = 0.0
    hess_base: np.ndarray | None = None
    values: list = field(default_factory=list)
    # (min, max) of every accepted iterate, kept only with record_inner
    bounds: list = field(default_factory=list)


def _damped_newton_dense(form, omega, free, g_free, cfg: SolverConfig, state: _InnerState,
                         lam_floor: float = 0.0):
    """Solve (H_FF + lam I) d = -g_F, doubling lam until the Cholesky succeeds."""
    idx = np.flatnonzero(free)
    blk = idx // form.M
    HFF = state.hess_base[np.ix_(idx, idx)]
    HFF += omega * (blk[:, None] == blk[None, :])
    lam = max(cfg.newton_damping, 0.25 * state.lam, lam_floor)
    idx = np.diag_indices_from(HFF)
    diag = HFF[idx].copy()
    while lam <= cfg.damping_cap:
        HFF[idx] = diag + lam
        try:
            cf = scipy.linalg.cho_factor(HFF, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            lam *= 2.0
            continue
        state.lam = lam
        return -scipy.linalg.cho_solve(cf, g_free, check_finite=False)
    state.lam = cfg.damping_cap
    return None


def _truncated_cg(form, omega, free, g_free, cfg: SolverConfig, state: _InnerState,
                  lam_floor: float = 0.0):
    """Truncated CG on the free block of (Hessian + lam I).

    Negative curvature met along the way raises lam (at least doubling it) and
    restarts, mirroring the factorization retry of the dense path.  Returns None
    once lam passes the cap.
    """
    full = np.zeros(form.size)
    majorizer = cfg.hessian == "majorizer"

    def hv(p, lam):
        full[:] = 0.0
        full[free] = p
        return penalty_hessian_matvec(form, full, omega, majorizer)[free] + lam * p

    lam = max(cfg.newton_damping, 0.25 * state.lam, lam_floor)
    while lam <= cfg.damping_cap:
        d = np.zeros_like(g_free)
        r = -g_free.copy()
        p = r.copy()
        rr = r @ r
        stop = (cfg.cg_rtol * math.sqrt(rr)) ** 2
        bad = None
        for _ in range(cfg.cg_maxiter):
            Ap = hv(p, lam)
            pp = p @ p
            curv = p @ Ap
            if curv <= 1e-12 * pp:
                bad = curv / pp
                break
            a = rr / curv
            d += a * p
            r -= a * Ap
            rr_new = r @ r
            if rr_new <= stop:
                break
            p = r + (rr_new / rr) * p
            rr = rr_new
        if bad is None:
            state.lam = lam
            return d
        # the Rayleigh quotient bounds how far lam is from making the system definite
        lam = max(2.0 * lam, 2.0 * (lam - bad))
    state.lam = cfg.damping_cap
    return None


def _armijo(form, omega, t, val, g, d, free, cfg: SolverConfig):
    """Backtrack along the projection arc t(a) = P_B(t + a d)."""
    K = cfg.K
    a = 1.0
    slope_free = float(g[free] @ d[free])
    active = ~free
    for _ in range(cfg.max_backtracks + 1):
        tn = project_box(t + a * d, K)
        vn, gn = penalty_value_grad(form, tn, omega)
        need = cfg.armijo_sigma * (-a * slope_free + float(g[active] @ (t[active] - tn[active])))
        if math.isfinite(vn) and val - vn >= need and vn <= val:
            return tn, vn, gn
        a *= 0.5
    return None


def _projected_gradient_step(form, omega, t, val, g, cfg: SolverConfig):
    a = 1.0
    for _ in range(cfg.max_backtracks + 1):
        tn = project_box(t - a * g, cfg.K)
        vn, gn = penalty_value_grad(form, tn, omega)
        if math.isfinite(vn) and val - vn >= cfg.armijo_sigma * float(g @ (t - tn)) and vn <= val:
            return tn, vn, gn
        a *= 0.5
    return None


def projected_newton_subsolve(form: AssignmentForm, omega: float, t0, tau: float,
                              config: SolverConfig | None = None, state: _InnerState | None = None):
    """Approximately minimize the penalty subproblem over the box.

    Returns ``(t, inner_iters, status)`` with status ``"converged"``, ``"cap"`` or
    ``"stall"``.  ``t`` satisfies ``kkt_residual <= tau`` when converged.
    """
    cfg = config or SolverConfig()
    state = state or _InnerState()
    K = cfg.K
    t = np.asarray(t0, dtype=float).copy()
    if np.any(t < 0) or np.any(t > K):
        raise ValueError("initial point must lie in the box [0, K]")
    dense = form.size <= cfg.dense_threshold
    if dense and state.hess_base is None:
        state.hess_base = 2.0 * (form.G if cfg.hessian == "majorizer" else form.Gtilde)
    state.values = []
    state.bounds = []

    val, g = penalty_value_grad(form, t, omega)
    if not math.isfinite(val):
        raise NumericError("non-finite objective at the initial point", t)
    if cfg.record_inner:
        state.values.append(val)
    for it in range(cfg.maxiter_inner):
        res = float(np.linalg.norm(t - project_box(t - g, K)))
        if res <= tau:
            return t, it, "converged"
        eps_a = min(cfg.active_eps, res)
        active = ((t <= eps_a) & (g > 0)) | ((t >= K - eps_a) & (g < 0))
        free = ~active
        d = -g.copy()
        step = None
        lam_floor = 0.0
        while step is None and np.any(free):
            if dense:
                dF = _damped_newton_dense(form, omega, free, g[free], cfg, state, lam_floor)
            else:
                dF = _truncated_cg(form, omega, free, g[free], cfg, state, lam_floor)
            if dF is None:
                break
            d[free] = dF
            step = _armijo(form, omega, t, val, g, d, free, cfg)
            # a rejected step means the model is trusted too far: damp harder and retry
            lam_floor = max(100.0 * state.lam, 1e-6)
            if lam_floor > cfg.damping_cap:
                break
        if step is None:
            step = _projected_gradient_step(form, omega, t, val, g, cfg)
        if step is None:
            return t, it, "stall"
        t, val, g = step
        if not math.isfinite(val):
            raise NumericError("non-finite objective", t)
        if cfg.record_inner:
            state.values.append(val)
            state.bounds.append((float(t.min()), float(t.max())))
    res = float(np.linalg.norm(t - project_box(t - g, K)))
    return t, cfg.maxiter_inner, "converged" if res <= tau else "cap"


def initial_point(instance: ChannelInstance, form: AssignmentForm, init: str) -> np.ndarray:
    if init == "uniform_te":
        return np.full(form.size, 1.0 / (0.2 + form.M))
    if init == "zero":
        return np.zeros(form.size)
    if init == "mmse":
        from .detectors import mmse_detect
        _, x_hat = mmse_detect(instance)
        return t_from_x(x_hat, form.M)
    raise ValueError(f"unknown init {init!r}")


def scaled_form(form: AssignmentForm) -> AssignmentForm:
    """Same minimizers, with Q and c divided by 2 mean(q_jj)."""
    s = 2.0 * float(np.mean(form.qdiag))
    if s <= 0:
        return form
    return dataclasses.replace(form, Q=form.Q / s, c=form.c / s,
                               norm_H_sq=form.norm_H_sq / s, norm_r_sq=form.norm_r_sq / s)


def support_of(t, eps: float) -> np.ndarray:
    return np.asarray(t) > eps


def pnqp_detect(instance: ChannelInstance, config: SolverConfig | None = None,
                t0=None) -> DetectionResult:
    """Run PN-QP and round the result to a PSK vector.

    With the default ``objective_scale`` the solver works on F / (2 mean q_jj);
    trace values (f, penalty, residual) are in those units, ``objective_P`` is not.
    """
    cfg = config or SolverConfig()
    start = time.perf_counter()
    form = build_assignment_form(instance)
    if cfg.objective_scale == "hessian_diag":
        form = scaled_form(form)
    n, M = form.n, form.M
    t = initial_point(instance, form, cfg.init) if t0 is None else project_box(np.asarray(t0, float), cfg.K)
    supp_prev = support_of(t, cfg.eps_support)
    trace = []
    inner_total = 0
    termination = "outer_cap"
    status = "converged"
    k = 0
    state = _InnerState()
    for k in range(1, cfg.maxiter_outer + 1):
        omega = cfg.omega0 * cfg.rho ** (k - 1)
        tau_k = cfg.tau_at(k)
        t, its, status = projected_newton_subsolve(form, omega, t, tau_k, cfg, state)
        inner_total += its
        supp = support_of(t, cfg.eps_support)
        if cfg.trace:
            val, g = penalty_value_grad(form, t, omega)
            viol = form.block_sums(t) - 1.0
            trace.append(dict(
                k=k, omega=omega, f=val - 0.5 * omega * float(viol @ viol),
                penalty=0.5 * omega * float(viol @ viol),
                residual=float(np.linalg.norm(t - project_box(t - g, cfg.K))),
                support_size=int(supp.sum()), tau=tau_k, inner_iters=its, status=status,
                max_violation=float(np.max(np.abs(viol))),
                inner_values=list(state.values), inner_bounds=list(state.bounds), t=t.copy(),
            ))
        one_per_block = np.all(supp.reshape(n, M).sum(axis=1) == 1)
        if one_per_block and np.array_equal(supp, supp_prev):
            termination = "support_stable"
            break
        supp_prev = supp
    else:
        if status == "stall":
            termination = "inner_stall"

    t_round = round_gradient_guided(form, t, normalize=cfg.round_normalize)
    x_hat = x_from_t(t_round, M)
    wall = time.perf_counter() - start
    return DetectionResult(
        x_hat=x_hat, objective_P=instance.objective(x_hat),
        ser=symbol_error_rate(x_hat, instance.x_star, M), t_final=t_round,
        outer_iters=k, inner_iters_total=inner_total, wall_time=wall,
        termination=termination, detector="pnqp", trace=trace,
    )


TRACE_FIELDS = ("k", "omega", "f", "penalty", "residual", "support_size")


def write_trace_csv(trace, path) -> None:
    """One row per outer iteration with the columns of ``TRACE_FIELDS``."""
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=TRACE_FIELDS, extrasaction="ignore")
        wr.writeheader()
        for row in trace:
            wr.writerow(row)
