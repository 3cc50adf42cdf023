import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsqp_mimo.core_model import (DimensionError, InvalidModulationError, make_instance,
                                  project_to_psk, psk_constellation, psk_indices,
                                  symbol_error_rate)

from conftest import orders, seeds


def test_small_constellations():
    assert np.allclose(psk_constellation(2).symbols, [1, -1])
    assert np.allclose(psk_constellation(4).symbols, [1, 1j, -1, -1j])
    s8 = psk_constellation(8).symbols
    h = math.sqrt(2) / 2
    for z in (h + h * 1j, -h + h * 1j, -h - h * 1j, h - h * 1j):
        assert np.min(np.abs(s8 - z)) < 1e-15


@pytest.mark.parametrize("M", [0, 1, 2.5, -4])
def test_bad_order(M):
    with pytest.raises(InvalidModulationError):
        psk_constellation(M)


@given(st.integers(2, 64))
def test_constellation_invariants(M):
    c = psk_constellation(M)
    assert np.allclose(np.abs(c.symbols), 1.0, atol=1e-12)
    assert c.symbols[0] == 1
    d = np.abs(c.symbols[:, None] - c.symbols[None, :]) + np.eye(M)
    assert d.min() > 1e-9
    assert np.allclose(np.exp(1j * c.angles), c.symbols, atol=1e-12)
    # rotating by one step shifts indices by one
    rot = c.symbols * np.exp(2j * np.pi / M)
    assert np.array_equal(psk_indices(rot, M), (np.arange(M) + 1) % M)


def test_projection_examples():
    assert project_to_psk(np.array([0.9 + 0.1j]), 4)[0] == 1
    assert abs(project_to_psk(np.array([0.7 + 0.7j]), 8)[0] - np.exp(1j * np.pi / 4)) < 1e-15
    assert project_to_psk(np.array([0.0]), 4)[0] == 1


@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=20), orders)
def test_projection_is_nearest_symbol(xs, M):
    x = np.array(xs)
    sym = psk_constellation(M).symbols
    got = psk_indices(x, M)
    dist = np.abs(x[:, None] - sym[None, :])
    best = dist.min(axis=1)
    assert np.all(dist[np.arange(x.size), got] <= best + 1e-9 * (1 + np.abs(x)))


@given(st.integers(0, 2**31), orders)
def test_projection_idempotent(seed, M):
    k = np.random.default_rng(seed).integers(0, M, 10)
    x = psk_constellation(M).symbols[k]
    assert np.array_equal(psk_indices(x, M), k)
    assert np.array_equal(project_to_psk(project_to_psk(x, M), M), project_to_psk(x, M))


def test_tie_goes_to_smaller_index():
    # midway between symbols 0 and 1 of 4-PSK
    assert psk_indices(np.array([1 + 1j]), 4)[0] == 0
    # midway between symbols 3 and 0 (wraps around)
    assert psk_indices(np.array([1 - 1j]), 4)[0] == 0
    assert psk_indices(np.array([-1 + 1j]), 4)[0] == 1


def test_ser_examples():
    s = psk_constellation(8).symbols
    x = s[np.arange(16) % 8]
    assert symbol_error_rate(x, x) == 0.0
    a = s[[0, 1, 2, 3]]
    b = s[[0, 1, 2, 4]]
    assert symbol_error_rate(a, b, 8) == 0.25
    with pytest.raises(DimensionError):
        symbol_error_rate(a, s[:3], 8)


@given(seeds, orders, st.integers(1, 30))
def test_ser_bounds_and_symmetry(seed, M, n):
    rng = np.random.default_rng(seed)
    s = psk_constellation(M).symbols
    a, b = s[rng.integers(0, M, n)], s[rng.integers(0, M, n)]
    e = symbol_error_rate(a, b, M)
    assert 0.0 <= e <= 1.0
    assert e == symbol_error_rate(b, a, M)
    assert symbol_error_rate(a, a, M) == 0.0


def test_instance_consistency():
    H = np.array([[1.0, 2j], [0.5, -1]])
    x = np.array([1, -1j])
    v = np.array([0.1, -0.2j])
    inst = make_instance(H, x, v, M=4)
    assert np.allclose(inst.r, H @ x + v)
    assert inst.m == 2 and inst.n == 2
    assert inst.objective(x) == pytest.approx(float(np.vdot(v, v).real))
    with pytest.raises(DimensionError):
        make_instance(H, np.array([1.0]), v, M=4)
