"""Problem data of the assignment (block simplex) form of PSK detection.

Variable t in R^{nM} holds n blocks of length M; block j is a weight vector
over the constellation for symbol j, and x = A t + i B t maps it back.
Objectives:

    h(t) = t' G t + 2 w' t          G = P' Qhat P,  w = P' chat
    f(t) = t' Gt t + 2 w' t         Gt = G with its n diagonal MxM blocks removed

Dense G / Gt are built lazily.  Everything the solver needs goes through the
factored products below, which cost O(n^2 + nM):

    Gt v = Re(conj(s) (Qo z)),   z = A v + i B v,   Qo = Q - Diag(diag Q)
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core_model import ChannelInstance, DimensionError, psk_constellation, symbol_indices


def cinner(x, v) -> float:
    """<x, v> = Re(x^H v)."""
    return float(np.vdot(x, v).real)


@dataclass(frozen=True, eq=False)
class AssignmentForm:
    n: int
    M: int
    m: int
    Q: np.ndarray
    c: np.ndarray
    symbols: np.ndarray
    norm_H_sq: float
    norm_r_sq: float

    @property
    def size(self) -> int:
        return self.n * self.M

    @property
    def alpha(self) -> np.ndarray:
        return self.symbols.real

    @property
    def beta(self) -> np.ndarray:
        return self.symbols.imag

    @cached_property
    def qdiag(self) -> np.ndarray:
        return np.diag(self.Q).real.copy()

    @cached_property
    def Qo(self) -> np.ndarray:
        Qo = self.Q.copy()
        np.fill_diagonal(Qo, 0.0)
        return Qo

    @cached_property
    def Qhat(self) -> np.ndarray:
        Q = self.Q
        return np.block([[Q.real, -Q.imag], [Q.imag, Q.real]])

    @cached_property
    def chat(self) -> np.ndarray:
        return np.concatenate([self.c.real, self.c.imag])

    @cached_property
    def A(self) -> np.ndarray:
        return np.kron(np.eye(self.n), self.alpha[None, :])

    @cached_property
    def B(self) -> np.ndarray:
        return np.kron(np.eye(self.n), self.beta[None, :])

    @cached_property
    def P(self) -> np.ndarray:
        return np.vstack([self.A, self.B])

    @cached_property
    def G(self) -> np.ndarray:
        G = self.P.T @ self.Qhat @ self.P
        return 0.5 * (G + G.T)

    @cached_property
    def w(self) -> np.ndarray:
        # P' chat, block j entry k = Re(conj(s_k) c_j)
        return (self.c.real[:, None] * self.alpha[None, :]
                + self.c.imag[:, None] * self.beta[None, :]).ravel()

    @cached_property
    def S_diag(self) -> np.ndarray:
        """The n diagonal blocks S_jj = q_jj (aa' + bb'), shape (n, M, M)."""
        base = np.outer(self.alpha, self.alpha) + np.outer(self.beta, self.beta)
        return self.qdiag[:, None, None] * base[None]

    @cached_property
    def Dtilde(self) -> np.ndarray:
        D = np.zeros((self.size, self.size))
        M = self.M
        for j in range(self.n):
            D[j * M:(j + 1) * M, j * M:(j + 1) * M] = self.S_diag[j]
        return D

    @cached_property
    def Gtilde(self) -> np.ndarray:
        # block (j, k) entry (a, b) = Re(conj(s_a) Qo_jk s_b)
        outer = np.conj(self.symbols)[:, None] * self.symbols[None, :]
        Gt = np.einsum("jk,ab->jakb", self.Qo, outer).real
        return Gt.reshape(self.size, self.size)

    def block(self, t, j: int) -> np.ndarray:
        return np.asarray(t)[j * self.M:(j + 1) * self.M]

    def blocks(self, t) -> np.ndarray:
        t = np.asarray(t)
        if t.shape != (self.size,):
            raise DimensionError(f"expected a vector of length {self.size}, got shape {t.shape}")
        return t.reshape(self.n, self.M)

    # factored products

    def to_complex(self, t) -> np.ndarray:
        """z = A t + i B t."""
        return self.blocks(t) @ self.symbols

    def lift(self, y) -> np.ndarray:
        """P' [Re y; Im y] for complex y of length n."""
        return (np.conj(self.symbols)[None, :] * np.asarray(y)[:, None]).real.ravel()

    def Gtilde_matvec(self, v) -> np.ndarray:
        return self.lift(self.Qo @ self.to_complex(v))

    def G_matvec(self, v) -> np.ndarray:
        return self.lift(self.Q @ self.to_complex(v))

    def block_sums(self, t) -> np.ndarray:
        return self.blocks(t).sum(axis=1)


def build_assignment_form(instance: ChannelInstance) -> AssignmentForm:
    H = np.asarray(instance.H, dtype=complex)
    r = np.asarray(instance.r, dtype=complex)
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(r))):
        raise FloatingPointError("non-finite entries in H or r")
    Q = H.conj().T @ H
    Q = 0.5 * (Q + Q.conj().T)
    c = -(H.conj().T @ r)
    return AssignmentForm(
        n=instance.n, M=instance.M, m=instance.m, Q=Q, c=c,
        symbols=psk_constellation(instance.M).symbols,
        norm_H_sq=float(np.sum(np.abs(H) ** 2)), norm_r_sq=float(np.vdot(r, r).real),
    )


def t_from_indices(k, M: int) -> np.ndarray:
    k = np.asarray(k, dtype=np.int64)
    t = np.zeros((k.size, M))
    t[np.arange(k.size), k] = 1.0
    return t.ravel()


def t_from_x(x, M: int) -> np.ndarray:
    """One-hot assignment vector of a PSK vector."""
    return t_from_indices(symbol_indices(x, M), M)


def x_from_t(t, M: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size % M:
        raise DimensionError(f"length {t.size} is not a multiple of M={M}")
    return t.reshape(-1, M) @ psk_constellation(M).symbols


def f_value(form: AssignmentForm, t) -> float:
    z = form.to_complex(t)
    return cinner(z, form.Qo @ z) + 2.0 * cinner(form.c, z)


def f_grad(form: AssignmentForm, t) -> np.ndarray:
    z = form.to_complex(t)
    return 2.0 * form.lift(form.Qo @ z + form.c)


def h_value(form: AssignmentForm, t) -> float:
    z = form.to_complex(t)
    return cinner(z, form.Q @ z) + 2.0 * cinner(form.c, z)


def dump_csv(form: AssignmentForm, gtilde_path, w_path) -> None:
    """Write dense Gtilde and w as CSV for cross-checking."""
    np.savetxt(gtilde_path, form.Gtilde, delimiter=",", fmt="%.17g")
    np.savetxt(w_path, form.w[None, :], delimiter=",", fmt="%.17g")
