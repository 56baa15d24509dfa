"""Fractional-programming baseline."""

import numpy as np
import pytest

from conftest import toy_net
from d2dpower import netgen, rates
from d2dpower.fplinq import FpState, fp_iterate, fp_step, fplinq


def test_single_link_keeps_full_power():
    # K = 1 has no interference, so x = 1 is optimal and a fixed point
    for g, noise in ((4.0, 1.0), (0.1, 1.0), (2e-6, 8e-11)):
        net = toy_net([[g]], noise=noise)
        x = fplinq(net, np.ones(1), 100)
        assert x[0] == 1.0


def test_zero_weight_link_shuts_off():
    # with no cross gains and w_2 = 0 the update is 0/0, resolved to 0
    gain = np.array([[2.0, 1e-300], [1e-300, 3.0]])
    net = toy_net(gain, noise=1.0)
    x = fplinq(net, np.array([1.0, 0.0]), 5)
    assert x[0] == 1.0 and x[1] == 0.0


def test_strong_interference_turns_one_link_off():
    # cross gains dominate; the stronger link should win. Oracle: grid scan
    # of the weighted sum-rate over [0, 1]^2 peaks at the (1, 0) vertex.
    gain = np.array([[2.0, 5.0], [5.0, 1.0]])
    net = toy_net(gain, noise=0.1)
    w = np.ones(2)
    grid = np.linspace(0.0, 1.0, 101)
    best, arg = -np.inf, None
    for a in grid:
        for b in grid:
            v = rates.weighted_sum_rate(np.array([a, b]), w, net)
            if v > best:
                best, arg = v, (a, b)
    assert arg == (1.0, 0.0)
    x = fplinq(net, w, 100)
    assert np.allclose(x, [1.0, 0.0])
    assert rates.weighted_sum_rate(x, w, net) == pytest.approx(best,
                                                               rel=1e-12)


def test_wsr_never_decreases():
    p = netgen.SystemParams()
    rng = np.random.default_rng(5)
    for seed in range(10):
        net = netgen.sample_layout(p, 10, seed=seed)
        w = rng.uniform(size=10)
        st = FpState(x=np.ones(10))
        prev = rates.weighted_sum_rate(st.x, w, net)
        for _ in range(60):
            st = fp_step(st, net, w)
            cur = rates.weighted_sum_rate(st.x, w, net)
            assert cur >= prev * (1.0 - 1e-9)
            prev = cur


def test_powers_stay_in_box():
    p = netgen.SystemParams()
    for seed in range(5):
        net = netgen.sample_layout(p, 8, seed=seed)
        x = fplinq(net, np.random.default_rng(seed).uniform(size=8), 100)
        assert np.all(x >= 0.0) and np.all(x <= 1.0)


def test_fp_step_counts_and_matches_iterate():
    p = netgen.SystemParams()
    net = netgen.sample_layout(p, 6, seed=77)
    w = np.random.default_rng(77).uniform(size=6)
    st = FpState(x=np.ones(6))
    for _ in range(7):
        st = fp_step(st, net, w)
    assert st.k == 7
    direct = fp_iterate(np.ones(6), w, net.gain, rates.offdiag(net.gain),
                        net.noise_power, 7)
    assert np.array_equal(st.x, direct)
    assert np.array_equal(fplinq(net, w, 7), direct)


def test_rejects_negative_weights_and_iters():
    net = toy_net([[4.0]], noise=1.0)
    with pytest.raises(ValueError):
        fplinq(net, np.array([-1.0]), 10)
    with pytest.raises(ValueError):
        fplinq(net, np.ones(1), -1)
    with pytest.raises(ValueError):
        fp_step(FpState(x=np.ones(1)), net, np.array([-1.0]))


def test_zero_iters_returns_start():
    net = toy_net([[4.0]], noise=1.0)
    assert np.array_equal(fplinq(net, np.ones(1), 0), np.ones(1))


def test_batched_iterate_matches_loop():
    p = netgen.SystemParams()
    nets = netgen.sample_instances(p, 5, 3, seed=31)
    gain = np.stack([n.gain for n in nets])
    w = np.random.default_rng(31).uniform(size=(3, 5))
    x0 = np.ones((3, 5))
    batched = fp_iterate(x0, w, gain, rates.offdiag(gain),
                         nets[0].noise_power, 20)
    for b, net in enumerate(nets):
        single = fplinq(net, w[b], 20)
        assert np.allclose(batched[b], single, rtol=1e-10, atol=1e-12)
