"""Unrolled primal-dual solver: updates, traces, schedules."""

import numpy as np
import pytest

from conftest import toy_net
from d2dpower import netgen, rates
from d2dpower.solver import (SolverState, StepSchedule, init_state, load_schedule,
                             pd_step, run, save_schedule, viva_defaults)


def test_schedule_validation():
    with pytest.raises(ValueError):
        StepSchedule(np.ones(3), np.ones(2), np.ones(3), {})
    with pytest.raises(ValueError):
        StepSchedule(np.array([np.nan]), np.ones(1), np.ones(1), {})
    with pytest.raises(ValueError):
        viva_defaults(0)
    s = viva_defaults(4, constant=0.01)
    assert s.n_layers == 4
    assert np.all(s.alpha1 == 0.01)
    assert np.all(s.alpha2 == 0.01)
    assert np.all(s.alpha3 == 0.01)


def test_schedule_vector_roundtrip():
    s = StepSchedule(np.array([1.0, 2.0]), np.array([3.0, 4.0]),
                     np.array([5.0, 6.0]), {"kind": "x"})
    v = s.to_vector()
    assert np.array_equal(v, [1, 2, 3, 4, 5, 6])
    back = StepSchedule.from_vector(v, metadata=s.metadata)
    assert np.array_equal(back.alpha2, s.alpha2)
    assert back.metadata == {"kind": "x"}
    with pytest.raises(ValueError):
        StepSchedule.from_vector(np.ones(4))


def test_init_state():
    net = toy_net([[4.0]], noise=1.0)
    fr = rates.scalarization_frame(net, np.ones(1))
    st = init_state(net, fr)
    assert st.t == 0.0 and st.lam == 1.0 and st.k == 0
    assert np.all(st.x == 0.01)
    with pytest.raises(ValueError):
        init_state(net, fr, x0=1.5)


def test_single_link_saturates_to_full_power():
    # K = 1: WSR is increasing in x, so the optimum is x = 1. A grid scan
    # is the oracle; 300 constant-step layers reach it from x0 = 0.01.
    net = toy_net([[4.0]], noise=1.0)
    grid = np.linspace(0.0, 1.0, 1001)
    wsr = np.log1p(4.0 * grid)
    assert grid[np.argmax(wsr)] == 1.0
    x, _ = run(net, np.ones(1), viva_defaults(300), x0=0.01)
    assert x[0] == pytest.approx(1.0, abs=1e-9)


def test_run_trace_matches_repeated_pd_step():
    p = netgen.SystemParams()
    net = netgen.sample_layout(p, 5, seed=2)
    w = np.random.default_rng(2).uniform(size=5)
    sched = viva_defaults(8)
    x, trace = run(net, w, sched)
    fr = rates.scalarization_frame(net, w)
    st = init_state(net, fr)
    for k in range(8):
        st = pd_step(st, fr, net, sched.alpha1[k], sched.alpha2[k],
                     sched.alpha3[k])
        assert st.k == k + 1
        assert np.array_equal(st.x, trace.x[k + 1])
        assert st.t == trace.t[k + 1]
        assert st.lam == trace.lam[k + 1]
    assert np.array_equal(x, st.x)


def test_trace_shapes_and_wsr_column():
    p = netgen.SystemParams()
    net = netgen.sample_layout(p, 4, seed=9)
    w = np.ones(4)
    x, trace = run(net, w, viva_defaults(6))
    assert trace.x.shape == (7, 4)
    assert trace.wsr.shape == (7,)
    for k in range(7):
        assert trace.wsr[k] == pytest.approx(
            rates.weighted_sum_rate(trace.x[k], w, net), rel=1e-12)
    xq, none_trace = run(net, w, viva_defaults(6), keep_trace=False)
    assert none_trace is None
    assert np.array_equal(x, xq)


def test_iterates_stay_in_box_and_cone():
    p = netgen.SystemParams()
    for seed in range(5):
        net = netgen.sample_layout(p, 10, seed=seed)
        w = np.random.default_rng(seed).uniform(size=10)
        _, trace = run(net, w, viva_defaults(30))
        assert np.all(trace.x >= 0.0) and np.all(trace.x <= 1.0)
        assert np.all(trace.lam >= 0.0)  # projection keeps lam feasible


def test_plain_mode_differs_and_skips_projection():
    p = netgen.SystemParams()
    net = netgen.sample_layout(p, 6, seed=13)
    w = np.random.default_rng(13).uniform(size=6)
    xn, tn = run(net, w, viva_defaults(20))
    xp, tp = run(net, w, viva_defaults(20), mode="plain")
    assert not np.array_equal(xn, xp)
    assert np.all(tp.x >= 0.0) and np.all(tp.x <= 1.0)  # clip still applies
    with pytest.raises(ValueError):
        run(net, w, viva_defaults(3), mode="bogus")


def test_zero_alpha2_freezes_powers():
    p = netgen.SystemParams()
    net = netgen.sample_layout(p, 4, seed=3)
    n = 5
    sched = StepSchedule(0.003 * np.ones(n), np.zeros(n), 0.003 * np.ones(n),
                         {})
    _, trace = run(net, np.ones(4), sched)
    assert np.all(trace.x == trace.x[0])


def test_pd_step_rejects_non_finite_state():
    net = toy_net([[4.0]], noise=1.0)
    fr = rates.scalarization_frame(net, np.ones(1))
    bad = SolverState(t=np.nan, x=np.array([0.5]), lam=1.0)
    with pytest.raises(ValueError):
        pd_step(bad, fr, net, 0.003, 0.003, 0.003)


def test_normalized_step_size_is_gradient_free():
    # in normalized mode the x displacement has norm a2 * lam while the
    # update stays interior, independent of the gradient magnitude
    p = netgen.SystemParams()
    net = netgen.sample_layout(p, 5, seed=17)
    w = np.ones(5)
    fr = rates.scalarization_frame(net, w)
    st = init_state(net, fr, x0=0.5)
    new = pd_step(st, fr, net, 0.003, 0.003, 0.003)
    moved = np.linalg.norm(new.x - st.x)
    assert moved == pytest.approx(0.003 * st.lam, rel=1e-12)


def test_schedule_file_roundtrip(tmp_path):
    sched = StepSchedule(np.array([0.1, 0.2]), np.array([0.3, 0.4]),
                         np.array([0.5, 0.6]), {"kind": "trained", "seed": 7})
    path = tmp_path / "sched.json"
    save_schedule(path, sched)
    back = load_schedule(path)
    assert np.array_equal(back.alpha1, sched.alpha1)
    assert np.array_equal(back.alpha2, sched.alpha2)
    assert np.array_equal(back.alpha3, sched.alpha3)
    assert back.metadata == sched.metadata
