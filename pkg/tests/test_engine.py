import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import queue_oracle
from privedge.engine import (MODE_QUEUE, OK, _mark_known, _Setup, format_log, peel_closure,
                             decode_event_counts, queue_batch, replay_scheme1, run_trial,
                             simulate, simulate_batch)
from privedge.exceptions import InfeasibleConfig
from privedge.latency import (SetupTimes, SystemConfig, decode_latency, scheme1_total_latency,
                              setup_matrix)
from privedge.optimizer import SearchSpace, enumerate_feasible, full_pattern_decodable
from privedge.schemes import PrivateCodingScheme
from privedge.secret_sharing import peel_pattern

CFG = SystemConfig()
EXAMPLE_PATTERN = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 1), (3, 4)]


def _sample(variant, count, seed):
    schemes = enumerate_feasible(SearchSpace(variant, 1, e_max=7))
    rng = np.random.default_rng(seed)
    return [schemes[i] for i in rng.choice(len(schemes), size=count, replace=False)]


@pytest.mark.parametrize("variant", [2, 3])
@pytest.mark.parametrize("gamma", [0.0, 0.7, 3.0])
def test_kernel_matches_heapq_oracle(variant, gamma):
    cfg = CFG.replace(gamma=gamma)
    lam = setup_matrix(20, 9, cfg.eta, 11)
    for s in _sample(variant, 12, int(gamma * 10) + variant):
        st_ = _Setup(s, cfg)
        mode, arr, counts, w_idx, s_idx, nb, ns, k, kp, t, work, dl_base, u, U = st_.args()
        lam_n = np.ascontiguousarray(lam[:, :s.e] / cfg.tau)
        status, end, rows, cols = queue_batch(lam_n, arr, counts, w_idx, s_idx, nb, ns, k, kp,
                                              work, dl_base, u, U)
        for i in range(lam.shape[0]):
            want, mask = queue_oracle.run(s.plan(), lam_n[i], arr, k, kp, work, dl_base, u, U)
            assert end[i] == pytest.approx(want, rel=1e-12), (s, i)
            out, _ = run_trial(s, cfg, lam[i])
            got_mask = np.zeros_like(mask)
            for b, h in out.downloaded_ids:
                got_mask[b - 1, h - 1] = True
            assert np.array_equal(got_mask, mask)
            assert (rows[i], cols[i]) == decode_event_counts(mask, k, kp)


@pytest.mark.parametrize("gamma", [0.0, 1.0, 4.0])
def test_queue_batch_equals_logging_kernel(gamma):
    cfg = CFG.replace(gamma=gamma)
    lam = setup_matrix(200, 9, cfg.eta, 2)
    for s in _sample(2, 10, 5) + _sample(3, 10, 6):
        st_ = _Setup(s, cfg)
        mode, arr, counts, w_idx, s_idx, nb, ns, k, kp, t, work, dl_base, u, U = st_.args()
        lam_n = np.ascontiguousarray(lam[:, :s.e] / cfg.tau)
        a = queue_batch(lam_n, arr, counts, w_idx, s_idx, nb, ns, k, kp, work, dl_base, u, U)
        b = simulate_batch(MODE_QUEUE, lam_n, arr, counts, w_idx, s_idx, nb, ns, k, kp, 0,
                           work, dl_base, u, U)
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])


def test_scheme3_identity_code_is_scheme2():
    lam = setup_matrix(300, 9, CFG.eta, 4)
    for s in enumerate_feasible(SearchSpace(2, 1, e_max=6)):
        s3 = PrivateCodingScheme(3, s.e, s.p, s.n, s.k, s.z, None, s.e, s.e)
        assert np.array_equal(simulate(s, CFG, lam), simulate(s3, CFG, lam))


def test_identity_code_decode_is_one_row_decode_per_row():
    s = PrivateCodingScheme(2, 9, 5, 4, 2, 1)
    out, _ = run_trial(s, CFG, setup_matrix(1, 9, CFG.eta, 0)[0])
    assert out.decode_time == pytest.approx(decode_latency(4, 2, CFG.m, CFG.r, CFG.delta))


def test_decode_counts_example_pattern():
    mask = np.zeros((3, 4), dtype=bool)
    for l, h in EXAMPLE_PATTERN:
        mask[l - 1, h - 1] = True
    # column 1 makes row 2 decodable, then column 2 makes row 3 decodable, plus the final decode
    assert decode_event_counts(mask, 3, 2) == (2, 3)
    assert decode_event_counts(np.ones((5, 5), dtype=bool), 3, 5) == (5, 0)
    assert decode_event_counts(np.ones((5, 5), dtype=bool), 3, 4) == (4, 1)


def _fewest_columns(mask, k, kp):
    nb, ns = mask.shape
    for size in range(ns + 1):
        for S in itertools.combinations(range(ns), size):
            m = mask.copy()
            left = set(S)
            changed = True
            while changed:
                changed = False
                m[m.sum(axis=1) >= k] = True
                for j in sorted(left):
                    if m[:, j].sum() >= kp:
                        m[:, j] = True
                        left.discard(j)
                        changed = True
            if not left and (m.sum(axis=1) >= k).sum() >= kp:
                return size
    return None


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.data())
def test_decode_counts_against_fewest_columns(nb, ns, data):
    k = data.draw(st.integers(1, ns))
    kp = data.draw(st.integers(1, nb))
    bits = data.draw(st.lists(st.booleans(), min_size=nb * ns, max_size=nb * ns))
    mask = np.array(bits).reshape(nb, ns)
    closure, _ = peel_pattern(mask, k, kp)
    rows, cols = decode_event_counts(mask, k, kp)
    best = _fewest_columns(mask, k, kp)
    if best is None:
        assert (rows, cols) == (-1, -1)
        assert not closure.all()
        return
    assert rows == kp
    final = 1 if kp < nb else 0
    assert best <= cols - final
    if closure.all():
        assert cols - final <= ns


def test_example_pattern_completes_on_sixth_cell():
    known = np.zeros((3, 4), dtype=bool)
    rowc = np.zeros(3, dtype=np.int64)
    colc = np.zeros(4, dtype=np.int64)
    stk = np.empty(12, dtype=np.int64)
    total = 0
    for i, (l, h) in enumerate(EXAMPLE_PATTERN):
        total += _mark_known(known, rowc, colc, l - 1, h - 1, 3, 2, stk)
        assert (total == 12) == (i == 5)
        ref = np.zeros((3, 4), dtype=bool)
        for ll, hh in EXAMPLE_PATTERN[: i + 1]:
            ref[ll - 1, hh - 1] = True
        peel_closure(ref, 3, 2)
        assert np.array_equal(ref, known)


def test_full_computation_decodable_for_uncoded_plans():
    for e in range(2, 10):
        for p in range(1, e + 1):
            for n in range(1, e + 1):
                plan = PrivateCodingScheme(2, e, p, n, 1).plan()
                for k in range(1, n + 1):
                    assert full_pattern_decodable(plan, k, e)


def _intervals(log, start_code, done_code):
    starts = [row[0] for row in log if int(row[1]) == start_code]
    dones = [row[0] for row in log if int(row[1]) == done_code]
    return list(zip(starts, dones))


@pytest.mark.parametrize("s", [PrivateCodingScheme(2, 9, 5, 4, 2, 1),
                               PrivateCodingScheme(3, 9, 3, 3, 2, 1, None, 7, 5),
                               PrivateCodingScheme(3, 6, 2, 5, 3, 1, None, 4, 3)])
def test_channel_exclusive_and_after_upload(s):
    lam = setup_matrix(30, 9, CFG.eta, 8)
    for i in range(30):
        out, log = run_trial(s, CFG, lam[i], log_capacity=10_000)
        iv = _intervals(log, 5, 6)
        assert iv and iv[0][0] >= out.upload_end
        for (a0, a1), (b0, _) in zip(iv, iv[1:]):
            assert a0 <= a1 <= b0
        mask = np.zeros((s.n_blocks, s.n), dtype=bool)
        for b, h in out.downloaded_ids:
            mask[b - 1, h - 1] = True
        peel_closure(mask, s.k, s.blocks_needed)
        assert mask.all()


def test_run_is_deterministic():
    s = PrivateCodingScheme(3, 9, 3, 3, 2, 1, None, 7, 5)
    lam = setup_matrix(1, 9, CFG.eta, 3)[0]
    a, la = run_trial(s, CFG, lam, log_capacity=5000)
    b, lb = run_trial(s, CFG, lam, log_capacity=5000)
    assert a == b and np.array_equal(la, lb)


def test_zero_gamma_ends_with_kth_distinct_ir():
    cfg = CFG.replace(gamma=0.0)
    s = PrivateCodingScheme(2, 6, 3, 4, 3, 1)
    lam = setup_matrix(40, 9, cfg.eta, 9)
    for i in range(40):
        out, log = run_trial(s, cfg, lam[i], log_capacity=10_000)
        seen = [set() for _ in range(s.n_blocks)]
        reach = [None] * s.n_blocks
        for row in log:
            if int(row[1]) == 2:
                b, h = int(row[3]), int(row[4])
                seen[b].add(h)
                if reach[b] is None and len(seen[b]) == s.k:
                    reach[b] = row[0]
        assert out.download_end == max(reach)
        assert out.total == pytest.approx(out.download_end + decode_latency(4, 3, 600, 50, 3))


def test_scheme2_beats_scheme1_on_average():
    lam = setup_matrix(1000, 9, CFG.eta, 12)
    for gamma in (0.0, 1.0, 3.0, 5.0):
        cfg = CFG.replace(gamma=gamma)
        for e, p, n, k in [(9, 5, 4, 2), (7, 4, 5, 3), (5, 3, 5, 3)]:
            s1 = simulate(PrivateCodingScheme(1, e, p, n, k, 1, k), cfg, lam)
            s2 = simulate(PrivateCodingScheme(2, e, p, n, k, 1), cfg, lam)
            assert s2.mean() <= s1.mean()


def test_toy_trace_by_hand():
    # e=2, p=1, n=k=2; EN 2 is 1000 units late. IR work and download are 300 each.
    s = PrivateCodingScheme(2, 2, 1, 2, 2)
    cfg = SystemConfig(gamma=1.0, e_max=2)
    out, log = run_trial(s, cfg, SetupTimes(np.array([0.0, 0.5])), log_capacity=100)
    text = format_log(log, cfg, s)
    assert _intervals(log, 5, 6) == [(350, 650), (650, 950), (1400, 1700), (1700, 2000)]
    assert out.total == 2000
    assert "200.000000 channel-idle" in text
    assert "950.000000 channel-idle" in text
    for line in ("50.000000 upload-complete en=1 slot=1", "100.000000 upload-complete en=2 slot=1",
                 "150.000000 upload-complete en=1 slot=2", "200.000000 upload-complete en=2 slot=2"):
        assert line in text


def test_replay_matches_closed_form_small():
    rng = np.random.default_rng(0)
    schemes = enumerate_feasible(SearchSpace(1, 1, e_max=6))
    for i in rng.choice(len(schemes), 50, replace=False):
        s = schemes[i]
        cfg = CFG.replace(gamma=float(rng.choice([0.0, 0.5, 2.0])))
        lam = SetupTimes(rng.exponential(2.0, s.e))
        a = replay_scheme1(s, cfg, lam).total
        b = scheme1_total_latency(s.plan(), cfg, lam, s.t, s.k).total
        assert abs(a - b) < 1e-9


def test_storage_violation_rejected():
    with pytest.raises(InfeasibleConfig):
        simulate(PrivateCodingScheme(3, 9, 3, 3, 2, 1, None, 4, 3), CFG, setup_matrix(2, 9, 0.5, 0))
