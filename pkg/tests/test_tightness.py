import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsqp_mimo import GenSpec, generate_instance
from rsqp_mimo.tightness import (ConditionReport, check_cond_exact_detection, check_cond_tightness,
                                 lambda_min_hermitian, q_bar, q_ring)

from conftest import instances, seeds


def test_report():
    r = ConditionReport("x", 2.0, 1.0)
    assert r.holds and r.margin == 1.0 and "holds=True" in r.as_line()
    assert not ConditionReport("x", 1.0, 1.0).holds


def test_noiseless_full_rank_holds(rng):
    H = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
    assert check_cond_tightness(H, np.zeros(6), 8).holds


def test_identity_channel_example():
    v = np.array([2.0, 0.5, 0.1])
    r = check_cond_tightness(np.eye(3), v, 4)
    assert r.lhs == pytest.approx(math.sin(math.pi / 4))
    assert r.rhs == pytest.approx(2.0)
    assert not r.holds


def test_diagonal_gram_reduces(rng):
    # orthogonal columns with different norms: Q is diagonal, Q_bar = Q / 2
    U = np.linalg.qr(rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3)))[0]
    H = U * np.array([1.0, 2.0, 0.5])
    v = 0.01 * (rng.standard_normal(5) + 1j * rng.standard_normal(5))
    ex = check_cond_exact_detection(H, v, 8)
    lam = lambda_min_hermitian(H.conj().T @ H)
    assert ex.lhs == pytest.approx(lam * math.sin(math.pi / 8) / math.sqrt(2))
    # holds iff lambda_min sin(pi/M) > sqrt(2) ||H^H v||_inf
    assert ex.holds == (lam * math.sin(math.pi / 8) > math.sqrt(2) * ex.rhs)
    assert check_cond_exact_detection(H, np.zeros(5), 8).holds


@given(instances(max_m=8, max_n=6), st.floats(1.01, 10))
def test_margin_decreases_with_noise(inst, a):
    if not np.any(inst.v):
        return
    for check in (check_cond_tightness, check_cond_exact_detection):
        r1, r2 = check(inst.H, inst.v, inst.M), check(inst.H, a * inst.v, inst.M)
        assert r1.lhs == r2.lhs
        assert r2.rhs == pytest.approx(a * r1.rhs)
        assert r2.margin < r1.margin


@given(seeds, st.integers(1, 8))
def test_lambda_min_matches_reference(seed, n):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A = Z + Z.conj().T
    ref = np.linalg.eigvalsh(A)[0]
    assert lambda_min_hermitian(A) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_auxiliary_matrices(rng):
    H = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    Q = H.conj().T @ H
    assert np.allclose(np.diag(q_ring(H)), 0)
    assert np.allclose(q_bar(H) - q_ring(H), 0.5 * np.diag(np.diag(Q)))


def test_noiseless_tall_recovery_when_both_hold():
    for s in range(10):
        inst = generate_instance(GenSpec(64, 4, 8, 0, seed=s, noiseless=True))
        assert check_cond_tightness(inst.H, inst.v, 8).holds
        assert check_cond_exact_detection(inst.H, inst.v, 8).holds
