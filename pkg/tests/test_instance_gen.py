import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsqp_mimo.core_model import psk_constellation
from rsqp_mimo.instance_gen import (GenSpec, generate_instance, read_instance, sigma2_from_snr,
                                    trial_seed, write_instance)

from conftest import instances, seeds


def test_sigma2_examples():
    assert sigma2_from_snr(16, 10 * math.log10(16)) == pytest.approx(1.0)
    assert sigma2_from_snr(32, 20) == pytest.approx(0.32)
    assert sigma2_from_snr(512, 0) == 512


@pytest.mark.parametrize("bad", [dict(m=0), dict(n=0), dict(M=1), dict(snr_db=math.inf),
                                 dict(seed=-1), dict(seed=2**64)])
def test_invalid_spec(bad):
    args = dict(m=4, n=4, M=8, snr_db=30.0, seed=0) | bad
    with pytest.raises(ValueError):
        GenSpec(**args)


@given(seeds)
def test_deterministic(seed):
    a = generate_instance(GenSpec(4, 4, 8, 30, seed=seed))
    b = generate_instance(GenSpec(4, 4, 8, 30, seed=seed))
    for f in ("H", "x_star", "v", "r"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


def test_noiseless_and_consistency():
    inst = generate_instance(GenSpec(6, 3, 4, 0.0, seed=5, noiseless=True))
    assert np.all(inst.v == 0) and inst.sigma2 == 0
    assert np.array_equal(inst.r, inst.H @ inst.x_star)
    inst = generate_instance(GenSpec(6, 3, 4, 7.0, seed=5))
    assert np.allclose(inst.r, inst.H @ inst.x_star + inst.v, rtol=1e-10, atol=1e-12)
    sym = psk_constellation(4).symbols
    assert np.all(np.min(np.abs(inst.x_star[:, None] - sym[None, :]), axis=1) < 1e-12)


def test_entry_moments():
    inst = generate_instance(GenSpec(1000, 1000, 4, 3.0, seed=11))
    h = inst.H.ravel()
    p = np.abs(h) ** 2
    # E|h|^2 = 1, Var|h|^2 = 1 for a unit circular Gaussian
    assert abs(p.mean() - 1.0) < 0.01
    assert abs(h.real.var() - 0.5) < 3 * 0.5 * math.sqrt(2 / h.size)
    vs = np.concatenate([generate_instance(GenSpec(1000, 4, 4, 3.0, seed=s)).v for s in range(100)])
    sigma2 = sigma2_from_snr(4, 3.0)
    se = sigma2 / math.sqrt(vs.size)
    assert abs(np.mean(np.abs(vs) ** 2) - sigma2) < 3 * se


def test_distinct_seeds_give_distinct_symbols():
    a = generate_instance(GenSpec(8, 64, 8, 10, seed=1)).x_star
    b = generate_instance(GenSpec(8, 64, 8, 10, seed=2)).x_star
    assert not np.array_equal(a, b)


def test_trial_seed_mixing():
    seeds_ = {trial_seed(7, g, s, t) for g in range(3) for s in range(3) for t in range(20)}
    assert len(seeds_) == 180
    assert trial_seed(7, 1, 2, 3) == trial_seed(7, 1, 2, 3)
    assert all(0 <= s < 2**64 for s in seeds_)


@given(instances(max_m=5, max_n=4))
def test_text_round_trip(tmp_path_factory, inst):
    path = tmp_path_factory.mktemp("inst") / "i.txt"
    write_instance(inst, path)
    back = read_instance(path)
    assert np.array_equal(back.H, inst.H)
    assert np.array_equal(back.v, inst.v)
    assert np.array_equal(back.x_star, inst.x_star)
    assert np.array_equal(back.r, inst.r)
    assert back.M == inst.M and back.seed == inst.seed
    assert back.snr_db == inst.snr_db or (math.isinf(back.snr_db) and math.isinf(inst.snr_db))


def test_file_header(tmp_path):
    inst = generate_instance(GenSpec(3, 2, 4, 12.5, seed=9))
    write_instance(inst, tmp_path / "x.txt")
    lines = (tmp_path / "x.txt").read_text().splitlines()
    assert lines[0] == "3 2 4 12.5 9"
    assert len(lines) == 1 + 3 + 1 + 3
