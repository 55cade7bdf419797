import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiretapnet import montecarlo as M
from wiretapnet.channelmath import (
    Distribution,
    WiretapChannel,
    bec,
    bsc,
    compose_degraded,
    identity_channel,
    mutual_information,
)


def half_erasure():
    return WiretapChannel(identity_channel(2), bec(0.5))


def test_identity_channel_counts_are_diagonal():
    wt = WiretapChannel(identity_channel(3), identity_channel(3))
    c = M.simulate_channel(wt, M.SimConfig(5000, seed=1))
    assert c.total == 5000
    off = c.counts.copy()
    for i in range(3):
        off[i, i, i] = 0
    assert off.sum() == 0


def test_erasure_fraction():
    c = M.simulate_channel(half_erasure(), M.SimConfig(200_000, seed=3))
    z = c.marginal("yz").sum(axis=0)
    assert abs(z[2] / c.total - 0.5) < 0.01


def test_same_seed_same_counts_and_different_seed_differs():
    cfg = M.SimConfig(70_000, seed=11)
    a = M.simulate_channel(half_erasure(), cfg).counts
    b = M.simulate_channel(half_erasure(), cfg).counts
    c = M.simulate_channel(half_erasure(), M.SimConfig(70_000, seed=12)).counts
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_threads_are_bit_identical(threads):
    serial = M.simulate_channel(half_erasure(), M.SimConfig(300_001, seed=5))
    par = M.simulate_channel(half_erasure(), M.SimConfig(300_001, seed=5, threads=threads))
    assert np.array_equal(serial.counts, par.counts)
    assert M.double_exposure(0.3, M.SimConfig(300_001, 5)) == M.double_exposure(
        0.3, M.SimConfig(300_001, 5, threads=threads)
    )


def test_prefix_blocks_are_shared():
    # a longer run extends a shorter one block by block
    short = M.simulate_channel(half_erasure(), M.SimConfig(M.BLOCK, seed=2)).counts
    long = M.simulate_channel(half_erasure(), M.SimConfig(2 * M.BLOCK, seed=2)).counts
    assert np.all(long >= short)


def test_eavesdropper_information_near_half_bit():
    c = M.simulate_channel(half_erasure(), M.SimConfig(1_000_000, seed=0))
    assert abs(M.empirical_mi(c, "xz") - 0.5) < 0.005
    assert abs(M.empirical_mi(c, "xy") - 1.0) < 0.005


@settings(max_examples=15)
@given(st.floats(0.02, 0.45), st.floats(0.05, 0.9), st.floats(0.1, 0.9), st.integers(0, 2**32))
def test_estimate_within_three_sigma(p, eps, px0, seed):
    wt = WiretapChannel(bsc(p), bec(eps))
    dist = Distribution([px0, 1 - px0])
    c = M.simulate_channel(wt, M.SimConfig(200_000, seed, dist))
    for pair, ch in (("xy", wt.forward), ("xz", compose_degraded(wt))):
        exact = mutual_information(dist.probs, ch)
        est = M.empirical_mi(c, pair)
        # plug-in bias is a few outputs over the trial count
        assert abs(est - exact) <= 3 * M.plugin_sigma(c, pair) + 1e-4


def test_single_symbol_counts_give_zero():
    counts = np.zeros((2, 2, 3), dtype=np.int64)
    counts[1, 0, 2] = 40
    jc = M.JointCounts(counts)
    assert M.empirical_mi(jc, "xy") == 0.0
    assert M.plugin_sigma(jc, "xz") == 0.0


def test_bad_pair_and_empty_counts():
    jc = M.JointCounts(np.zeros((2, 2, 2), dtype=np.int64))
    with pytest.raises(ValueError):
        jc.marginal("zx")
    with pytest.raises(ValueError):
        M.empirical_mi(jc)


@pytest.mark.parametrize("p,expected", [(0.0, 1.0), (1.0, 0.0)])
def test_double_exposure_extremes(p, expected):
    assert M.double_exposure(p, M.SimConfig(10_000, 4)) == expected


def test_double_exposure_half():
    assert abs(M.double_exposure(0.5, M.SimConfig(100_000, 0)) - 0.75) < 0.01


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_double_exposure_rejects_bad_probability(p):
    with pytest.raises(ValueError):
        M.double_exposure(p, M.SimConfig(10))


def test_config_validation():
    with pytest.raises(ValueError):
        M.SimConfig(0)
    with pytest.raises(ValueError):
        M.SimConfig(10, threads=0)


def test_input_distribution_size_checked():
    with pytest.raises(ValueError):
        M.simulate_channel(half_erasure(), M.SimConfig(10, input_dist=Distribution([0.2, 0.3, 0.5])))
