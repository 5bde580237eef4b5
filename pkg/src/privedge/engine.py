"""Event-driven simulation of the private schemes.

One kernel serves all variants. ``MODE_REPLAY`` re-derives the
download-after-compute scheme event by event. ``MODE_QUEUE`` runs the
priority-queue variant; the uncoded queue scheme is the coded one with an
``(e, e)`` identity code on W, so a column of the IR array never decodes
before it is complete.

Events at equal times are handled in the order: channel, IR completion,
IR start, each by EN index. Downloads start only once every event at the
current instant has been processed, so simultaneous replicas count toward
the multiplicity snapshot taken at transmission start.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .exceptions import Deadlock, InfeasibleConfig, InfeasibleT
from .latency import (SetupTimes, SystemConfig, TrialOutcome, decode_latency, op_latency,
                      upload_arrivals, upload_end)
from .reed_solomon import decoding_cost_ops
from .schemes import KernelPlan, PrivateCodingScheme, kernel_plan_for
from .secret_sharing import peel_pattern

MODE_REPLAY = 1
MODE_QUEUE = 2

OK, INFEASIBLE, DEADLOCK = 0, 1, 2

# event log codes
EV_START, EV_COMPLETE, EV_SKIP, EV_DISCARD = 1, 2, 3, 4
EV_DL_START, EV_DL_DONE, EV_EN_WAIT, EV_CH_IDLE, EV_CH_OPEN = 5, 6, 7, 8, 9

EVENT_NAMES = {
    EV_START: "ir-start", EV_COMPLETE: "ir-computed", EV_SKIP: "ir-skip",
    EV_DISCARD: "ir-discard", EV_DL_START: "download-start", EV_DL_DONE: "download-done",
    EV_EN_WAIT: "en-idle", EV_CH_IDLE: "channel-idle", EV_CH_OPEN: "upload-phase-end",
}


@njit(cache=True)
def peel_closure(mask, k, kp):
    """In-place closure of a known-cell mask under row (k) and column (k') decoding."""
    nb, ns = mask.shape
    progress = True
    while progress:
        progress = False
        for i in range(nb):
            c = 0
            for j in range(ns):
                if mask[i, j]:
                    c += 1
            if c >= k and c < ns:
                for j in range(ns):
                    mask[i, j] = True
                progress = True
        for j in range(ns):
            c = 0
            for i in range(nb):
                if mask[i, j]:
                    c += 1
            if c >= kp and c < nb:
                for i in range(nb):
                    mask[i, j] = True
                progress = True


@njit(cache=True)
def decode_event_counts(downloaded, k, kp):
    """Component decodes the users need to obtain ``W x`` from a decodable pattern.

    The result needs ``k'`` decoded rows (each row decode yields one coded
    block of ``W x``) and, with coding on W, one final length-``n'`` decode.
    Rows decodable from known cells are decoded first; otherwise the column
    that makes the most rows decodable is decoded (smallest index on ties),
    and so on until ``k'`` rows are decodable. Returns ``(rows, columns)``
    with the final decode included in ``columns``; ``(-1, -1)`` if the
    pattern never yields ``k'`` rows.
    """
    nb, ns = downloaded.shape
    rowc = np.zeros(nb, dtype=np.int64)
    colc = np.zeros(ns, dtype=np.int64)
    for i in range(nb):
        for j in range(ns):
            if downloaded[i, j]:
                rowc[i] += 1
                colc[j] += 1
    return _decode_counts(downloaded.copy(), k, kp, rowc, colc, np.empty(nb, dtype=np.bool_))


@njit(cache=True)
def _decode_counts(mask, k, kp, rowc, colc, done):
    """Worker for :func:`decode_event_counts`; ``mask``, ``rowc`` and ``colc``
    hold the downloaded pattern and its counts and are overwritten."""
    nb, ns = mask.shape
    final = 1 if kp < nb else 0
    done[:] = False
    n_done = 0
    cols = 0
    while True:
        for i in range(nb):
            if done[i] or rowc[i] < k:
                continue
            done[i] = True
            n_done += 1
            if rowc[i] < ns:
                for j in range(ns):
                    if not mask[i, j]:
                        mask[i, j] = True
                        colc[j] += 1
                rowc[i] = ns
        if n_done >= kp:
            return kp, cols + final
        best = -1
        best_gain = -1
        for j in range(ns):
            if colc[j] < kp or colc[j] == nb:
                continue
            gain = 0
            for i in range(nb):
                if not done[i] and not mask[i, j] and rowc[i] + 1 >= k:
                    gain += 1
            if gain > best_gain:
                best = j
                best_gain = gain
        if best < 0:
            return -1, -1
        for i in range(nb):
            if not mask[i, best]:
                mask[i, best] = True
                rowc[i] += 1
        colc[best] = nb
        cols += 1


@njit(cache=True)
def _topk_inv(rho, k, u):
    s = 0.0
    nb, n = rho.shape
    for b in range(nb):
        taken = np.zeros(n, dtype=np.bool_)
        for _ in range(k):
            best = -1
            for h in range(n):
                if not taken[h] and rho[b, h] > 0 and (best < 0 or rho[b, h] > rho[b, best]):
                    best = h
            if best < 0:
                return np.inf
            taken[best] = True
            s += 1.0 / min(rho[b, best], u)
    return s


@njit(cache=True)
def _mark_known(known, rowc, colc, b0, h0, k, kp, stk):
    """Add one cell to the known set and propagate row/column decoding.

    Keeps ``known`` closed under the rules used by :func:`peel_closure`;
    returns the number of cells that became known.
    """
    nb, ns = known.shape
    if known[b0, h0]:
        return 0
    known[b0, h0] = True
    stk[0] = b0 * ns + h0
    top = 1
    added = 0
    while top > 0:
        top -= 1
        b = stk[top] // ns
        h = stk[top] % ns
        added += 1
        rowc[b] += 1
        colc[h] += 1
        if rowc[b] == k:
            for j in range(ns):
                if not known[b, j]:
                    known[b, j] = True
                    stk[top] = b * ns + j
                    top += 1
        if colc[h] == kp:
            for i in range(nb):
                if not known[i, h]:
                    known[i, h] = True
                    stk[top] = i * ns + h
                    top += 1
    return added


@njit(cache=True)
def _log(logbuf, nlog, t, code, a, b, c, d):
    if nlog < logbuf.shape[0]:
        logbuf[nlog, 0] = t
        logbuf[nlog, 1] = code
        logbuf[nlog, 2] = a
        logbuf[nlog, 3] = b
        logbuf[nlog, 4] = c
        logbuf[nlog, 5] = d
    return nlog + 1


@njit(cache=True)
def simulate_trial(mode, lam, arrivals, counts, w_idx, s_idx, nb, ns, k, kp, t,
                   work, dl_base, u, U, logbuf):
    """Run one trial.

    Returns ``(status, end, extra, last_ir, nlog, downloaded)``. For the
    replay mode ``end`` is the end of the computation phase and ``extra`` the
    download sum ``sum 1/min(rho, u)``; for the queue mode ``end`` is the
    completion of the last needed download and ``extra`` is unused
    decodes in the user's decoding schedule.
    """
    e = lam.shape[0]
    p = w_idx.shape[1]
    inf = np.inf
    en_t = np.full(e, inf)
    en_pri = np.zeros(e, dtype=np.int64)  # pending event: 1 completion, 2 start; 0 none
    en_slot = np.zeros(e, dtype=np.int64)
    en_pos = np.zeros(e, dtype=np.int64)
    for j in range(e):
        if counts[j] > 0:
            en_t[j] = arrivals[j, 0] + lam[j]
            en_pri[j] = 2
    rho = np.zeros((nb, ns), dtype=np.int64)
    known = np.zeros((nb, ns), dtype=np.bool_)
    committed = np.zeros((nb, ns), dtype=np.bool_)
    rowc = np.zeros(nb, dtype=np.int64)
    colc = np.zeros(ns, dtype=np.int64)
    stk = np.empty(nb * ns, dtype=np.int64)
    qb = np.empty(nb * ns, dtype=np.int64)  # queued cells (rho > 0), unordered
    qh = np.empty(nb * ns, dtype=np.int64)
    nq = 0
    nknown = 0
    cnt = np.zeros(nb, dtype=np.int64)
    dist = np.zeros(nb, dtype=np.int64)
    if U > 0.0:
        ch_state = 0  # upload phase
        ch_t = U
    else:
        ch_state = 2  # idle
        ch_t = inf
    ch_b = -1
    ch_h = -1
    ch_r = 0
    full_on_done = False
    idle_logged = False
    nlog = 0
    T = 0.0
    started = False
    last_ir = 0.0
    while True:
        # earliest pending event: (time, priority, EN index)
        nt = inf
        kind = -1
        jj = -1
        if mode == 2 and ch_state != 2:
            nt = ch_t
            kind = 0
        for j in range(e):
            tj = en_t[j]
            if tj < nt or (tj == nt and tj < inf and en_pri[j] < kind):
                nt = tj
                kind = en_pri[j]
                jj = j
        if started and nt > T:
            # end of the instant T
            if mode == 1:
                if cnt.min() >= t and dist.min() >= k:
                    return OK, T, _topk_inv(rho, k, u), last_ir, nlog, committed
            elif ch_state == 2 and T >= U:
                # highest multiplicity first, ties to the smaller block then share
                bb = -1
                hh = -1
                br = 0
                qi = 0
                while qi < nq:
                    b = qb[qi]
                    h = qh[qi]
                    if known[b, h]:
                        rho[b, h] = 0
                        nq -= 1
                        qb[qi] = qb[nq]
                        qh[qi] = qh[nq]
                        continue
                    rr = rho[b, h]
                    if rr > br or (rr == br and (b < bb or (b == bb and h < hh))):
                        bb = b
                        hh = h
                        br = rr
                    qi += 1
                if bb >= 0:
                    ch_r = rho[bb, hh]
                    rho[bb, hh] = 0
                    committed[bb, hh] = True
                    nknown += _mark_known(known, rowc, colc, bb, hh, k, kp, stk)
                    full_on_done = nknown == nb * ns
                    ch_state = 1
                    ch_t = T + dl_base / min(ch_r, u)
                    ch_b = bb
                    ch_h = hh
                    idle_logged = False
                    nlog = _log(logbuf, nlog, T, 5, -1, bb, hh, ch_r)
                    if ch_t < nt or (ch_t == nt and kind != 0):
                        nt = ch_t
                        kind = 0
                        jj = -1
                elif not idle_logged:
                    nlog = _log(logbuf, nlog, T, 8, -1, -1, -1, 0)
                    idle_logged = True
        if nt == inf:
            break
        T = nt
        started = True
        if kind == 0:
            if ch_state == 1:
                nlog = _log(logbuf, nlog, T, 6, -1, ch_b, ch_h, ch_r)
                if full_on_done:
                    return OK, T, 0.0, last_ir, nlog, committed
            else:
                nlog = _log(logbuf, nlog, T, 9, -1, -1, -1, 0)
            ch_state = 2
            ch_t = inf
            continue
        j = jj
        slot = en_slot[j]
        pos = en_pos[j]
        b = w_idx[j, pos]
        h = s_idx[j, slot]
        advance = False
        if kind == 1:
            advance = True
            if mode == 1:
                nlog = _log(logbuf, nlog, T, 2, j, b, h, rho[b, h] + 1)
                cnt[b] += 1
                if rho[b, h] == 0:
                    dist[b] += 1
                rho[b, h] += 1
                last_ir = T
            elif known[b, h]:
                nlog = _log(logbuf, nlog, T, 4, j, b, h, 0)
            else:
                if rho[b, h] == 0:
                    qb[nq] = b
                    qh[nq] = h
                    nq += 1
                rho[b, h] += 1
                last_ir = T
                nlog = _log(logbuf, nlog, T, 2, j, b, h, rho[b, h])
        else:
            if mode == 2 and known[b, h]:
                nlog = _log(logbuf, nlog, T, 3, j, b, h, 0)
                advance = True
            else:
                nlog = _log(logbuf, nlog, T, 1, j, b, h, 0)
                en_pri[j] = 1
                en_t[j] = T + work
        if advance:
            pos += 1
            if pos == p:
                pos = 0
                slot += 1
            en_slot[j] = slot
            en_pos[j] = pos
            if slot < counts[j]:
                en_pri[j] = 2
                if pos == 0 and arrivals[j, slot] > T:
                    nlog = _log(logbuf, nlog, T, 7, j, -1, s_idx[j, slot], 0)
                    en_t[j] = arrivals[j, slot]
                else:
                    en_t[j] = T
            else:
                en_pri[j] = 0
                en_t[j] = inf
    if mode == 1:
        return INFEASIBLE, inf, inf, last_ir, nlog, committed
    return DEADLOCK, inf, inf, last_ir, nlog, committed


@njit(cache=True)
def _next_ir(j, T, slot, pos, p, counts, arrivals, w_idx, s_idx, known, en_t, en_pri,
             en_slot, en_pos, work):
    """Advance EN ``j`` past its IR at (slot, pos) and schedule what follows.

    Known cells are skipped in zero time. Returns nothing; updates the EN arrays.
    """
    while True:
        pos += 1
        if pos == p:
            pos = 0
            slot += 1
        if slot >= counts[j]:
            en_pri[j] = 0
            en_t[j] = np.inf
            return
        if pos == 0 and arrivals[j, slot] > T:
            en_pri[j] = 2
            en_t[j] = arrivals[j, slot]
            break
        if not known[w_idx[j, pos], s_idx[j, slot]]:
            en_pri[j] = 1
            en_t[j] = T + work
            break
    en_slot[j] = slot
    en_pos[j] = pos


@njit(cache=True)
def queue_batch(lam, arrivals, counts, w_idx, s_idx, nb, ns, k, kp, work, dl_base, u, U):
    """Priority-queue variants over many trials without event logging.

    Same schedule as :func:`simulate_trial` in queue mode. Returns
    ``(status, end, row_decodes, column_decodes)``.
    """
    trials, e = lam.shape
    p = w_idx.shape[1]
    inf = np.inf
    status = np.zeros(trials, dtype=np.int64)
    out_end = np.empty(trials)
    out_rows = np.zeros(trials, dtype=np.int64)
    out_cols = np.zeros(trials, dtype=np.int64)
    en_t = np.empty(e)
    en_pri = np.empty(e, dtype=np.int64)
    en_slot = np.empty(e, dtype=np.int64)
    en_pos = np.empty(e, dtype=np.int64)
    rho = np.empty((nb, ns), dtype=np.int64)
    known = np.empty((nb, ns), dtype=np.bool_)
    committed = np.empty((nb, ns), dtype=np.bool_)
    rowc = np.empty(nb, dtype=np.int64)
    colc = np.empty(ns, dtype=np.int64)
    stk = np.empty(nb * ns, dtype=np.int64)
    # levcnt[r, b]: cells of block b queued with multiplicity r (known ones removed lazily)
    levcnt = np.empty((e + 1, nb), dtype=np.int64)
    crow = np.empty(nb, dtype=np.int64)
    ccol = np.empty(ns, dtype=np.int64)
    ddone = np.empty(nb, dtype=np.bool_)
    total = nb * ns
    for tr in range(trials):
        rho[:, :] = 0
        known[:, :] = False
        committed[:, :] = False
        crow[:] = 0
        ccol[:] = 0
        rowc[:] = 0
        colc[:] = 0
        levcnt[:, :] = 0
        top = 0
        for j in range(e):
            en_slot[j] = 0
            en_pos[j] = 0
            if counts[j] > 0:
                en_t[j] = arrivals[j, 0] + lam[tr, j]
                en_pri[j] = 2
            else:
                en_t[j] = inf
                en_pri[j] = 0
        nknown = 0
        busy = U > 0.0  # channel blocked by the upload or a download
        ch_t = U if busy else inf
        downloading = False
        full = False
        T = 0.0
        started = False
        st = DEADLOCK
        end = inf
        while True:
            nt = inf
            jj = -1
            pri = 3
            if busy:
                nt = ch_t
                pri = 0
            for j in range(e):
                tj = en_t[j]
                if tj < nt or (tj == nt and tj < inf and en_pri[j] < pri):
                    nt = tj
                    pri = en_pri[j]
                    jj = j
            if started and nt > T and not busy and T >= U and top > 0:
                bb = -1
                hh = -1
                br = top
                while br > 0 and bb < 0:
                    for b in range(nb):
                        if levcnt[br, b] == 0:
                            continue
                        for h in range(ns):
                            if rho[b, h] == br:
                                if known[b, h]:
                                    rho[b, h] = 0
                                    levcnt[br, b] -= 1
                                elif bb < 0:
                                    bb = b
                                    hh = h
                        if bb >= 0:
                            break
                    if bb < 0:
                        br -= 1
                top = br
                if bb >= 0:
                    rho[bb, hh] = 0
                    levcnt[br, bb] -= 1
                    committed[bb, hh] = True
                    crow[bb] += 1
                    ccol[hh] += 1
                    nknown += _mark_known(known, rowc, colc, bb, hh, k, kp, stk)
                    full = nknown == total
                    busy = True
                    downloading = True
                    ch_t = T + dl_base / min(br, u)
                    if ch_t < nt or (ch_t == nt and pri != 0):
                        nt = ch_t
                        pri = 0
                        jj = -1
            if nt == inf:
                break
            T = nt
            started = True
            if pri == 0:
                busy = False
                ch_t = inf
                if downloading and full:
                    st = OK
                    end = T
                    out_rows[tr], out_cols[tr] = _decode_counts(committed, k, kp, crow, ccol,
                                                                 ddone)
                    break
                downloading = False
                continue
            j = jj
            slot = en_slot[j]
            pos = en_pos[j]
            b = w_idx[j, pos]
            h = s_idx[j, slot]
            if pri == 1:
                if not known[b, h]:
                    r0 = rho[b, h]
                    if r0 > 0:
                        levcnt[r0, b] -= 1
                    levcnt[r0 + 1, b] += 1
                    rho[b, h] = r0 + 1
                    if r0 + 1 > top:
                        top = r0 + 1
                _next_ir(j, T, slot, pos, p, counts, arrivals, w_idx, s_idx, known,
                         en_t, en_pri, en_slot, en_pos, work)
            elif known[b, h]:
                _next_ir(j, T, slot, pos, p, counts, arrivals, w_idx, s_idx, known,
                         en_t, en_pri, en_slot, en_pos, work)
            else:
                en_pri[j] = 1
                en_t[j] = T + work
        status[tr] = st
        out_end[tr] = end
    return status, out_end, out_rows, out_cols


@njit(cache=True)
def simulate_batch(mode, lam, arrivals, counts, w_idx, s_idx, nb, ns, k, kp, t,
                   work, dl_base, u, U):
    trials = lam.shape[0]
    status = np.zeros(trials, dtype=np.int64)
    end = np.empty(trials)
    extra = np.empty(trials)
    logbuf = np.zeros((0, 6))
    for tr in range(trials):
        st, en, ex, _, _, _ = simulate_trial(mode, lam[tr], arrivals, counts, w_idx, s_idx,
                                             nb, ns, k, kp, t, work, dl_base, u, U, logbuf)
        status[tr] = st
        end[tr] = en
        extra[tr] = ex
    return status, end, extra


class _Setup:
    """Scheme-dependent constants shared by single-trial and batch runs."""

    def __init__(self, scheme: PrivateCodingScheme, config: SystemConfig):
        kp_: KernelPlan = kernel_plan_for(scheme)
        self.scheme = scheme
        self.kp = kp_
        plan = kp_.plan
        self.plan = plan
        e = scheme.e
        self.rows = scheme.block_rows(config.m)
        self.work = self.rows
        self.arrivals = upload_arrivals(e, max(plan.a, 1), config.gamma, config.r)
        self.U = upload_end(e, plan.a, config.gamma, config.r)
        self.u = config.users(e)
        self.dl_base = config.gamma * self.rows
        if scheme.variant == 3:
            self.col_k = scheme.k_prime
            if scheme.p > config.mu * scheme.k_prime:
                raise InfeasibleConfig(
                    f"p/k' = {scheme.p}/{scheme.k_prime} exceeds storage mu={config.mu}")
        else:
            self.col_k = e
            if scheme.p > config.mu * e:
                raise InfeasibleConfig(f"p/e = {scheme.p}/{e} exceeds storage mu={config.mu}")
        self.mode = MODE_REPLAY if scheme.variant == 1 else MODE_QUEUE
        self.t = scheme.t if scheme.variant == 1 else 0
        c = op_latency(config.delta, config.r)
        # one component decode per row of a block, for every user
        self.row_unit = c * self.rows * float(decoding_cost_ops(scheme.n, scheme.k))
        self.col_unit = 0.0
        if scheme.variant == 3:
            self.col_unit = c * self.rows * float(decoding_cost_ops(scheme.n_prime,
                                                                   scheme.k_prime))
        self.row_decode = c * config.m * float(decoding_cost_ops(scheme.n, scheme.k))

    def args(self):
        s = self.scheme
        return (self.mode, self.arrivals, self.kp.counts, self.kp.w_idx, self.kp.s_idx,
                s.n_blocks, s.n, s.k, self.col_k, self.t, self.work, self.dl_base,
                self.u, self.U)

    def decode_time(self, row_events=None, col_events=0):
        """Users' decoding latency; the queue variants pay per peeling event."""
        if self.mode == MODE_REPLAY or row_events is None:
            return self.row_decode
        return self.row_unit * row_events + self.col_unit * col_events


def _lam_norm(setup, config: SystemConfig, e: int) -> np.ndarray:
    lam = setup.lam if isinstance(setup, SetupTimes) else np.asarray(setup, dtype=float)
    if lam.shape[-1] < e:
        raise InfeasibleConfig(f"need setup times for {e} ENs, got {lam.shape[-1]}")
    return np.ascontiguousarray(lam[..., :e] / config.tau)


def run_trial(scheme: PrivateCodingScheme, config: SystemConfig, setup,
              log_capacity: int = 0):
    """Simulate one trial; returns ``(TrialOutcome, raw log array)``."""
    st = _Setup(scheme, config)
    lam = _lam_norm(setup, config, scheme.e)
    mode, arr, counts, w_idx, s_idx, nb, ns, k, kp, t, work, dl_base, u, U = st.args()
    logbuf = np.zeros((log_capacity, 6))
    status, end, extra, last_ir, nlog, dl_mask = simulate_trial(
        mode, lam, arr, counts, w_idx, s_idx, nb, ns, k, kp, t, work, dl_base, u, U, logbuf)
    log = logbuf[: min(nlog, log_capacity)]
    if status == INFEASIBLE:
        raise InfeasibleT(f"t={scheme.t} is never reached")
    if status == DEADLOCK:
        raise Deadlock("all ENs finished before the downloaded IRs became decodable")
    if mode == MODE_REPLAY:
        dl = dl_base * extra
        dec = st.decode_time()
        out = TrialOutcome(U, end, end + dl, dec, end + dl + dec)
    else:
        dec = st.decode_time(*decode_event_counts(dl_mask, k, kp))
        ids = [(int(b) + 1, int(h) + 1) for b, h in np.argwhere(dl_mask)]
        events = peel_pattern(dl_mask, k, kp)[1]
        out = TrialOutcome(U, last_ir, end, dec, end + dec, ids, events)
    return out, log


def run_scheme2(scheme: PrivateCodingScheme, config: SystemConfig, setup) -> TrialOutcome:
    if scheme.variant != 2:
        raise InfeasibleConfig("run_scheme2 needs a variant-2 scheme")
    return run_trial(scheme, config, setup)[0]


def run_scheme3(scheme: PrivateCodingScheme, config: SystemConfig, setup) -> TrialOutcome:
    if scheme.variant != 3:
        raise InfeasibleConfig("run_scheme3 needs a variant-3 scheme")
    return run_trial(scheme, config, setup)[0]


def replay_scheme1(scheme: PrivateCodingScheme, config: SystemConfig, setup) -> TrialOutcome:
    if scheme.variant != 1:
        raise InfeasibleConfig("replay_scheme1 needs a variant-1 scheme")
    return run_trial(scheme, config, setup)[0]


def simulate(scheme: PrivateCodingScheme, config: SystemConfig, lam_matrix) -> np.ndarray:
    """Total latency of ``scheme`` for each row of an absolute setup-time matrix.

    Infeasible trials (deadlock, unreachable ``t``) give ``inf``.
    """
    st = _Setup(scheme, config)
    lam = _lam_norm(lam_matrix, config, scheme.e)
    mode, arr, counts, w_idx, s_idx, nb, ns, k, kp, t, work, dl_base, u, U = st.args()
    if mode == MODE_REPLAY:
        status, end, extra = simulate_batch(mode, lam, arr, counts, w_idx, s_idx, nb, ns, k,
                                            kp, t, work, dl_base, u, U)
        total = end + dl_base * extra + st.row_decode
    else:
        status, end, rows, cols = queue_batch(lam, arr, counts, w_idx, s_idx, nb, ns, k, kp,
                                              work, dl_base, u, U)
        total = end + st.decode_time(rows, cols)
    total[status != OK] = np.inf
    return total


def format_log(log, config: SystemConfig, scheme: PrivateCodingScheme) -> str:
    """Readable event log including the deterministic upload completions."""
    plan = scheme.plan()
    lines = []
    for j, ss in enumerate(plan.sets_s):
        for hp, h in enumerate(ss, start=1):
            tt = config.gamma * config.r * (scheme.e * (hp - 1) + j + 1)
            lines.append((tt, 0, f"upload-complete en={j + 1} slot={hp} share={h}"))
    for i, (tt, code, j, b, h, d) in enumerate(log):
        code = int(code)
        parts = [EVENT_NAMES[code]]
        if j >= 0:
            parts.append(f"en={int(j) + 1}")
        if b >= 0:
            parts.append(f"block={int(b) + 1}")
        if h >= 0:
            parts.append(f"share={int(h) + 1}")
        if code in (EV_DL_START, EV_DL_DONE, EV_COMPLETE):
            parts.append(f"rho={int(d)}")
        lines.append((float(tt), 1 + i, " ".join(parts)))
    lines.sort(key=lambda x: (x[0], x[1]))
    return "\n".join(f"{tt:.6f} {txt}" for tt, _, txt in lines)
