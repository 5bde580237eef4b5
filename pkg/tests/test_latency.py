import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privedge.assignment import make_plan
from privedge.latency import (SetupTimes, SystemConfig, compute_start_times, decode_latency,
                              download_latency, exponential_from_uniform, sample_setup_times,
                              scheme1_total_latency, select_download, setup_matrix,
                              upload_arrival, upload_arrivals, upload_end)
from privedge.exceptions import InvalidParams
from privedge.optimizer import max_t


def test_config_defaults_and_validation():
    c = SystemConfig()
    assert (c.e_max, c.m, c.r, c.tau, c.eta, c.delta) == (9, 600, 50, 0.0005, 0.5, 3.0)
    assert c.mu == pytest.approx(2 / 3)
    for bad in ({"mu": 0}, {"mu": 1.5}, {"eta": 0}, {"gamma": -1}, {"m": 0}, {"u": 0},
                {"log_base": "10"}):
        with pytest.raises(InvalidParams):
            SystemConfig(**bad)


def test_setup_times():
    lam = sample_setup_times(100_000, 0.5, np.random.default_rng(7)).lam
    assert abs(lam.mean() - 2.0) < 0.02
    assert exponential_from_uniform(np.array([1.0]), 0.5)[0] == 0.0
    assert np.array_equal(setup_matrix(50, 4, 0.5, 3), setup_matrix(50, 4, 0.5, 3))
    with pytest.raises(InvalidParams):
        SetupTimes([-1.0, 2.0])


def test_upload_arrivals():
    assert upload_arrival(3, 2, 1.0, 50, 5) == 400
    assert upload_arrival(1, 1, 2.0, 50, 5) == 100
    arr = upload_arrivals(5, 3, 1.0, 50)
    assert arr[2, 1] == 400 and arr.max() == upload_end(5, 3, 1.0, 50) == 50 * 5 * 3


def test_compute_start_upload_bound_and_compute_bound():
    arr = upload_arrivals(3, 2, 10.0, 50)
    start = compute_start_times(arr, np.zeros(3), 1.0)
    assert np.array_equal(start, arr)
    lam = np.array([5.0, 0.5, 2.0])
    start = compute_start_times(np.zeros((3, 3)), lam, 40.0)
    assert np.allclose(start, lam[:, None] + 40.0 * np.arange(3)[None, :])


def test_compute_start_mixed_hand_trace():
    # EN 1: arrivals 1 and 5, setup 2, work 3: start 3 then max(6, 5) = 6
    # EN 2: arrivals 2 and 10, setup 0: start 2 then max(5, 10) = 10
    arr = np.array([[1.0, 5.0], [2.0, 10.0]])
    start = compute_start_times(arr, np.array([2.0, 0.0]), 3.0)
    assert start.tolist() == [[3.0, 6.0], [2.0, 10.0]]


def test_download_latency_examples():
    assert download_latency(np.ones((3, 4), int), 2, 2.0, 5.0) == 2.0 * 5.0 * 6
    assert download_latency(np.array([[7]]), 1, 1.0, 10.0, u=4) == 10.0 / 4
    rho = np.array([[3, 1], [2, 2]])
    assert download_latency(rho, 2, 1.0, 1.0, u=3) == pytest.approx(7 / 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.data())
def test_selection_maximizes_rho(nb, n, data):
    k = data.draw(st.integers(1, n))
    rho = np.array(data.draw(st.lists(st.lists(st.integers(1, 6), min_size=n, max_size=n),
                                      min_size=nb, max_size=nb)))
    chosen = select_download(rho, k)
    for l in range(nb):
        got = sum(r for b, _, r in chosen if b == l + 1)
        best = max(sum(rho[l, list(c)]) for c in itertools.combinations(range(n), k))
        assert got == best
    u = data.draw(st.integers(1, 6))
    want = sum(1 / min(r, u) for _, _, r in chosen)
    assert download_latency(rho, k, 1.0, 1.0, u) == pytest.approx(want)


def test_decode_latency_examples():
    assert decode_latency(4, 3, 600, 50, 3) == pytest.approx(3 / 99 * 600 * 14)
    assert decode_latency(1, 1, 600, 50, 3) == 0
    assert decode_latency(5, 2, 1200, 50, 3) == pytest.approx(2 * decode_latency(5, 2, 600, 50, 3))


def test_scheme1_hand_trace():
    # e=3, p=1, n=k=t=2, no setup delay: blocks finish their two IRs at 450, 500, 550
    plan = make_plan(3, 1, 2)
    cfg = SystemConfig(gamma=1.0, e_max=3)
    out = scheme1_total_latency(plan, cfg, SetupTimes(np.zeros(3)), t=2, k=2)
    assert out.compute_end == 550
    assert out.download_end == 550 + 3 * 2 * 200
    assert out.decode_time == 0
    assert out.total == 1750


def test_scheme1_no_communication():
    plan = make_plan(4, 2, 3)
    cfg = SystemConfig(gamma=0.0, e_max=4)
    lam = SetupTimes(np.array([0.1, 0.0, 0.2, 0.05]))
    out = scheme1_total_latency(plan, cfg, lam, t=max_t(plan), k=2)
    work = cfg.m / 4
    chains = lam.lam / cfg.tau + plan.a * plan.p * work
    assert out.upload_end == 0
    assert out.compute_end <= chains.max() + 1e-9
    assert out.total == pytest.approx(out.compute_end + decode_latency(3, 2, cfg.m, cfg.r, cfg.delta))


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7), st.data())
def test_scheme1_compute_end_monotone_in_setup(e, data):
    p = data.draw(st.integers(1, e))
    n = data.draw(st.integers(2, e))
    plan = make_plan(e, p, n)
    k = min(plan.a + 1, n)
    cfg = SystemConfig(gamma=data.draw(st.sampled_from([0.0, 1.0, 3.0])), e_max=e)
    lam = np.array(data.draw(st.lists(st.floats(0, 3), min_size=e, max_size=e)))
    base = scheme1_total_latency(plan, cfg, SetupTimes(lam), t=k, k=k).compute_end
    j = data.draw(st.integers(0, e - 1))
    more = lam.copy()
    more[j] += data.draw(st.floats(0, 3))
    assert scheme1_total_latency(plan, cfg, SetupTimes(more), t=k, k=k).compute_end >= base - 1e-9


def test_scheme1_total_can_drop_when_a_node_slows():
    # the later stop lets a second replica land, which shortens the download
    plan = make_plan(3, 2, 3)
    cfg = SystemConfig(gamma=5.0, e_max=3)
    lam = np.array([1.47682672, 1.41090702, 1.18843529])
    slow = lam.copy()
    slow[1] = 1.54805468
    a = scheme1_total_latency(plan, cfg, SetupTimes(lam), t=3, k=3)
    b = scheme1_total_latency(plan, cfg, SetupTimes(slow), t=3, k=3)
    assert b.compute_end > a.compute_end
    assert b.total < a.total
