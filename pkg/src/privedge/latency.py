"""Normalized latency model: setup times, upload/compute schedule, download and decoding.

All times are normalized by ``tau``, the time an EN needs for one inner
product for every user.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import numpy as np
from numba import njit

from .assignment import AssignmentPlan
from .exceptions import InfeasibleT, InvalidParams
from .reed_solomon import decoding_cost_ops


def _fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x).limit_denominator(10**6)


@dataclass(frozen=True)
class SystemConfig:
    """Physical and model parameters; defaults are the reference experiment settings."""

    e_max: int = 9
    mu: Fraction = Fraction(2, 3)
    tau: float = 0.0005
    eta: float = 0.5
    delta: float = 3.0
    gamma: float = 1.0
    m: int = 600
    r: int = 50
    u: int | None = None  # None: at least max multiplicity (u >= e)
    q: int = 65537
    seed: int = 0
    log_base: str = "e"  # broadcast penalty log for the nonprivate baseline: "e" or "2"

    def __post_init__(self):
        object.__setattr__(self, "mu", _fraction(self.mu))
        if not 0 < self.mu <= 1:
            raise InvalidParams(f"mu must lie in (0, 1], got {self.mu}")
        if self.eta <= 0 or self.tau <= 0:
            raise InvalidParams("eta and tau must be positive")
        if self.gamma < 0 or self.delta < 0:
            raise InvalidParams("gamma and delta must be nonnegative")
        for name in ("m", "r", "e_max"):
            if getattr(self, name) < 1:
                raise InvalidParams(f"{name} must be >= 1")
        if self.u is not None and self.u < 1:
            raise InvalidParams("u must be >= 1")
        if self.log_base not in ("e", "2"):
            raise InvalidParams("log_base must be 'e' or '2'")

    def users(self, e: int) -> int:
        return e if self.u is None else self.u

    def replace(self, **changes) -> "SystemConfig":
        kw = asdict(self)
        kw.update(changes)
        return SystemConfig(**kw)

    def items(self):
        for f in fields(self):
            yield f.name, getattr(self, f.name)


@dataclass
class SetupTimes:
    """Per-EN setup times ``lambda_j`` in absolute time units."""

    lam: np.ndarray

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        if np.any(self.lam < 0):
            raise InvalidParams("setup times must be nonnegative")

    def normalized(self, tau: float) -> np.ndarray:
        return self.lam / tau


def exponential_from_uniform(U, eta: float):
    return -np.log(U) / eta


def sample_setup_times(e: int, eta: float, rng: np.random.Generator) -> SetupTimes:
    """``e`` i.i.d. Exp(eta) draws via ``-ln(U)/eta`` with ``U`` in ``(0, 1]``."""
    U = 1.0 - rng.random(e)
    return SetupTimes(exponential_from_uniform(U, eta))


def setup_matrix(trials: int, e: int, eta: float, seed: int) -> np.ndarray:
    """``trials x e`` absolute setup times; row ``i`` depends only on ``seed`` and ``i``'s position."""
    rng = np.random.default_rng(seed)
    U = 1.0 - rng.random((trials, e))
    return exponential_from_uniform(U, eta)


def upload_arrival(j: int, h_prime: int, gamma: float, r: int, e: int) -> float:
    """Time EN ``j`` holds its ``h'``-th share matrix under round-robin unicast."""
    return gamma * r * (e * (h_prime - 1) + j)


def upload_arrivals(e: int, a: int, gamma: float, r: int) -> np.ndarray:
    j = np.arange(1, e + 1)[:, None]
    h = np.arange(1, a + 1)[None, :]
    return gamma * r * (e * (h - 1) + j)


def upload_end(e: int, a: int, gamma: float, r: int) -> float:
    return gamma * r * e * a


def compute_start_times(arrivals, lam_norm, per_share_work: float, counts=None) -> np.ndarray:
    """Start of each EN's computation on each assigned share matrix.

    ``start[j, 0] = lam_norm[j] + arrivals[j, 0]`` and
    ``start[j, h] = max(start[j, h-1] + per_share_work, arrivals[j, h])``.
    Slots beyond ``counts[j]`` are NaN.
    """
    arrivals = np.asarray(arrivals, dtype=float)
    e, a = arrivals.shape
    counts = np.full(e, a) if counts is None else np.asarray(counts)
    start = np.full((e, a), np.nan)
    for j in range(e):
        if counts[j] == 0:
            continue
        start[j, 0] = lam_norm[j] + arrivals[j, 0]
        for h in range(1, counts[j]):
            start[j, h] = max(start[j, h - 1] + per_share_work, arrivals[j, h])
    return start


def select_download(rho, k: int):
    """Per block, the ``k`` computed IRs of largest multiplicity (ties: smaller ``h``).

    Returns ``[(l, h, rho)]`` with 1-based indices.
    """
    rho = np.asarray(rho)
    chosen = []
    for l in range(rho.shape[0]):
        avail = [h for h in range(rho.shape[1]) if rho[l, h] > 0]
        if len(avail) < k:
            raise InfeasibleT(f"block {l + 1} has only {len(avail)} distinct IRs, need {k}")
        avail.sort(key=lambda h: (-rho[l, h], h))
        chosen += [(l + 1, h + 1, int(rho[l, h])) for h in avail[:k]]
    return chosen


def download_latency(rho, k: int, gamma: float, block_rows: float, u: int | None = None) -> float:
    """``gamma * block_rows * sum 1/min(rho, u)`` over the selected IRs."""
    total = 0.0
    for _, _, r_ in select_download(rho, k):
        total += 1.0 / (r_ if u is None else min(r_, u))
    return gamma * block_rows * total


def op_latency(delta: float, r: int) -> float:
    """User time for one field operation: an inner product is ``r`` mult + ``r-1`` add."""
    return delta / (2 * r - 1)


def decode_latency(n: int, k: int, m: int, r: int, delta: float) -> float:
    """User decoding time for one RS decode per row of ``W``; zero for ``n == 1``."""
    if k > n or k < 1:
        raise InvalidParams(f"k={k} must lie in [1, n={n}]")
    return op_latency(delta, r) * m * float(decoding_cost_ops(n, k))


@dataclass
class TrialOutcome:
    upload_end: float
    compute_end: float
    download_end: float
    decode_time: float
    total: float
    downloaded_ids: list = field(default_factory=list)
    decode_events: list = field(default_factory=list)


def scheme1_total_latency(plan: AssignmentPlan, config: SystemConfig, setup: SetupTimes,
                          t: int, k: int) -> TrialOutcome:
    """Download-after-compute latency of one trial.

    ENs compute in processing order; the computation phase ends at the first
    instant every block has at least ``t`` computed IRs (duplicates counted)
    and ``k`` distinct shares. Then the ``k`` highest-multiplicity IRs per
    block are downloaded and the users decode.
    """
    e, p = plan.e, plan.p
    w = config.m / e
    a = plan.a
    arr = upload_arrivals(e, a, config.gamma, config.r)
    counts = np.array([len(s) for s in plan.sets_s])
    lam = setup.normalized(config.tau)[:e]
    start = compute_start_times(arr, lam, p * w, counts)
    done = []
    for j in range(e):
        for h in range(counts[j]):
            for i in range(p):
                done.append((start[j, h] + (i + 1) * w, j, plan.sets_w[j][i], plan.sets_s[j][h]))
    done.sort(key=lambda x: (x[0], x[1]))
    nb, n = plan.n_blocks, plan.n
    cnt = np.zeros(nb, dtype=int)
    rho = np.zeros((nb, n), dtype=int)
    idx = 0
    comp_end = None
    while idx < len(done):
        now = done[idx][0]
        while idx < len(done) and done[idx][0] == now:
            _, _, l, h = done[idx]
            cnt[l - 1] += 1
            rho[l - 1, h - 1] += 1
            idx += 1
        if cnt.min() >= t and (rho > 0).sum(axis=1).min() >= k:
            comp_end = now
            break
    if comp_end is None:
        raise InfeasibleT(f"t={t} is never reached for this plan")
    chosen = select_download(rho, k)
    dl = download_latency(rho, k, config.gamma, w, config.users(e))
    dec = decode_latency(n, k, config.m, config.r, config.delta)
    return TrialOutcome(
        upload_end=upload_end(e, a, config.gamma, config.r),
        compute_end=comp_end,
        download_end=comp_end + dl,
        decode_time=dec,
        total=comp_end + dl + dec,
        downloaded_ids=[(l, h) for l, h, _ in chosen],
    )


@njit(cache=True)
def _topk_inverse_sum(rho, k, u):
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
def scheme1_batch(lam, arrivals, counts, w_idx, s_idx, nb, ns, k, work, u, t_values):
    """Compute-phase end and download multiplier sum for every trial and every ``t``.

    Returns ``(comp_end, inv_sum)``; download time is ``gamma * rows * inv_sum``.
    Unreachable ``t`` gives ``inf``.
    """
    trials, e = lam.shape
    p = w_idx.shape[1]
    nt = t_values.shape[0]
    n_ir = 0
    for j in range(e):
        n_ir += counts[j] * p
    comp = np.full((trials, nt), np.inf)
    inv = np.full((trials, nt), np.inf)
    times = np.empty(n_ir)
    blk = np.empty(n_ir, dtype=np.int64)
    shr = np.empty(n_ir, dtype=np.int64)
    for tr in range(trials):
        pos = 0
        for j in range(e):
            s = 0.0
            for h in range(counts[j]):
                if h == 0:
                    s = arrivals[j, 0] + lam[tr, j]
                else:
                    s = max(s + p * work, arrivals[j, h])
                for i in range(p):
                    times[pos] = s + (i + 1) * work
                    blk[pos] = w_idx[j, i]
                    shr[pos] = s_idx[j, h]
                    pos += 1
        order = np.argsort(times, kind="mergesort")
        cnt = np.zeros(nb, dtype=np.int64)
        dist = np.zeros(nb, dtype=np.int64)
        rho = np.zeros((nb, ns), dtype=np.int64)
        ti = 0
        idx = 0
        while idx < n_ir and ti < nt:
            now = times[order[idx]]
            while idx < n_ir and times[order[idx]] == now:
                o = order[idx]
                b = blk[o]
                h = shr[o]
                cnt[b] += 1
                if rho[b, h] == 0:
                    dist[b] += 1
                rho[b, h] += 1
                idx += 1
            if dist.min() >= k:
                cmin = cnt.min()
                while ti < nt and cmin >= t_values[ti]:
                    comp[tr, ti] = now
                    inv[tr, ti] = _topk_inverse_sum(rho, k, u)
                    ti += 1
    return comp, inv
