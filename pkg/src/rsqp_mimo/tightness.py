"""Sufficient conditions for unique recovery and for exact PN-QP detection."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConditionReport:
    which: str
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs > self.rhs

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    def as_line(self) -> str:
        return (f"{self.which}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} "
                f"margin={self.margin:.6g} holds={self.holds}")


def lambda_min_hermitian(A) -> float:
    """Smallest eigenvalue of a Hermitian matrix via its real symmetric 2n x 2n embedding."""
    A = np.asarray(A, dtype=complex)
    A = 0.5 * (A + A.conj().T)
    emb = np.block([[A.real, -A.imag], [A.imag, A.real]])
    return float(np.linalg.eigvalsh(emb)[0])


def _noise_term(H, v) -> float:
    return float(np.max(np.abs(np.asarray(H).conj().T @ np.asarray(v))))


def check_cond_tightness(H, v, M: int) -> ConditionReport:
    """lambda_min(H^H H) sin(pi/M) > ||H^H v||_inf."""
    H = np.asarray(H, dtype=complex)
    lhs = lambda_min_hermitian(H.conj().T @ H) * math.sin(math.pi / M)
    return ConditionReport("unique_recovery", lhs, _noise_term(H, v))


def q_bar(H) -> np.ndarray:
    Q = np.asarray(H).conj().T @ np.asarray(H)
    return Q - 0.5 * np.diag(np.diag(Q).real)


def q_ring(H) -> np.ndarray:
    Q = np.asarray(H).conj().T @ np.asarray(H)
    return Q - np.diag(np.diag(Q).real)


def check_cond_exact_detection(H, v, M: int) -> ConditionReport:
    """sqrt(2) lambda_min(Q - Diag(diag Q)/2) sin(pi/M) > ||H^H v||_inf."""
    H = np.asarray(H, dtype=complex)
    lhs = math.sqrt(2.0) * lambda_min_hermitian(q_bar(H)) * math.sin(math.pi / M)
    return ConditionReport("exact_detection", lhs, _noise_term(H, v))
