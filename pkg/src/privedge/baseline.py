"""Nonprivate comparison scheme: broadcast upload, MDS-coded W with replication.

The coded rows are split into ``e`` groups of near-equal size. Group ``g`` is
stored on ENs ``g, g-1, ..., g-rho+1`` (mod ``e``) and EN ``j`` computes its
groups in the order ``j, j+1, ..., j+rho-1``, one coded row per normalized
time unit. Computation stops once ``K_c`` distinct rows exist; the users then
download the ``K_c`` rows of largest multiplicity and decode one length-``N_c``
codeword each.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleConfig, InvalidParams
from .latency import SetupTimes, SystemConfig, TrialOutcome, op_latency
from .reed_solomon import decoding_cost_ops


def baseline_upload_latency(gamma: float, r: int, e: int, log_base: str = "e") -> float:
    """Broadcasting the data to ``e`` ENs costs ``gamma * r * log(e)``."""
    if e < 2:
        raise InvalidParams("broadcast upload needs e >= 2")
    lg = math.log(e) if log_base == "e" else math.log2(e)
    return gamma * r * lg


@dataclass(frozen=True)
class BaselineConfig:
    e: int
    K_c: int
    N_c: int
    replication: int

    def __post_init__(self):
        if self.e < 2:
            raise InvalidParams("e must be >= 2")
        if not 1 <= self.K_c <= self.N_c:
            raise InvalidParams(f"need 1 <= K_c <= N_c, got K_c={self.K_c}, N_c={self.N_c}")
        if not 1 <= self.replication <= self.e:
            raise InvalidParams(f"replication must lie in [1, e], got {self.replication}")

    def group_sizes(self) -> np.ndarray:
        base, extra = divmod(self.N_c, self.e)
        return np.array([base + (g < extra) for g in range(self.e)], dtype=np.int64)

    def stored_rows(self) -> np.ndarray:
        """Coded rows held by each EN."""
        sizes = self.group_sizes()
        return np.array([sum(sizes[(j + i) % self.e] for i in range(self.replication))
                         for j in range(self.e)])

    def check_storage(self, config: SystemConfig):
        cap = config.mu * config.m
        if self.stored_rows().max() > cap:
            raise InfeasibleConfig(f"an EN would store {self.stored_rows().max()} rows, "
                                   f"capacity is {float(cap):g}")
        if self.K_c != config.m:
            raise InfeasibleConfig(f"K_c must equal m={config.m}")


def default_baseline(e: int, config: SystemConfig) -> BaselineConfig:
    """Largest replication whose code still carries redundancy (``N_c > K_c``)
    when the storage ``mu * m * e`` is filled."""
    total = config.mu * config.m * e
    for rho in range(e, 0, -1):
        n_c = math.floor(total / rho)
        if n_c <= config.m:
            continue
        b = BaselineConfig(e, config.m, n_c, rho)
        try:
            b.check_storage(config)
        except InfeasibleConfig:
            continue
        return b
    raise InfeasibleConfig(f"no redundant baseline code fits for e={e}")


def baseline_decode_latency(bcfg: BaselineConfig, config: SystemConfig) -> float:
    return op_latency(config.delta, config.r) * float(decoding_cost_ops(bcfg.N_c, bcfg.K_c))


def _row_layout(bcfg: BaselineConfig):
    """For each (holder slot, row): the EN and the row's offset in that EN's work list."""
    e, rho = bcfg.e, bcfg.replication
    sizes = bcfg.group_sizes()
    first = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    en = np.empty((rho, bcfg.N_c), dtype=np.int64)
    off = np.empty((rho, bcfg.N_c), dtype=np.int64)
    for g in range(e):
        rows = np.arange(first[g], first[g] + sizes[g])
        for i in range(rho):
            j = (g - i) % e
            # EN j works on groups j, j+1, ..., so group g sits at position i
            before = sum(sizes[(j + s) % e] for s in range(i))
            en[i, rows] = j
            off[i, rows] = before + np.arange(sizes[g]) + 1
    return en, off


def _phases(bcfg: BaselineConfig, config: SystemConfig, lam_matrix, chunk: int = 1000):
    bcfg.check_storage(config)
    lam = np.asarray(lam_matrix, dtype=float)[:, :bcfg.e] / config.tau
    if lam.shape[1] < bcfg.e:
        raise InvalidParams(f"need {bcfg.e} setup times per trial")
    U = baseline_upload_latency(config.gamma, config.r, bcfg.e, config.log_base)
    en, off = _row_layout(bcfg)
    u = config.users(bcfg.e)
    comp = np.empty(lam.shape[0])
    dl = np.empty(lam.shape[0])
    for lo in range(0, lam.shape[0], chunk):
        done = lam[lo:lo + chunk][:, en] + off[None, :, :] + U  # trials x rho x N_c
        end = np.partition(done.min(axis=1), bcfg.K_c - 1, axis=1)[:, bcfg.K_c - 1]
        mult = (done <= end[:, None, None]).sum(axis=1)
        top = -np.sort(-mult, axis=1)[:, :bcfg.K_c]
        comp[lo:lo + chunk] = end
        dl[lo:lo + chunk] = config.gamma * (1.0 / np.minimum(top, u)).sum(axis=1)
    return U, comp, dl, baseline_decode_latency(bcfg, config)


def baseline_batch(bcfg: BaselineConfig, config: SystemConfig, lam_matrix) -> np.ndarray:
    """Total latency of every trial (rows of absolute setup times)."""
    _, comp, dl, dec = _phases(bcfg, config, lam_matrix)
    return comp + dl + dec


def baseline_total_latency(bcfg: BaselineConfig, config: SystemConfig,
                           setup: SetupTimes) -> TrialOutcome:
    U, comp, dl, dec = _phases(bcfg, config, np.asarray(setup.lam, dtype=float)[None, :])
    c, d = float(comp[0]), float(dl[0])
    return TrialOutcome(upload_end=U, compute_end=c, download_end=c + d,
                        decode_time=dec, total=c + d + dec)


def optimize_baseline(config: SystemConfig, lam_matrix):
    """Best ``(BaselineConfig, mean)`` over ``e`` and every redundant replication level."""
    best = None
    for e in range(2, config.e_max + 1):
        for rho in range(1, e + 1):
            n_c = math.floor(config.mu * config.m * e / rho)
            if n_c <= config.m:
                continue
            b = BaselineConfig(e, config.m, n_c, rho)
            try:
                mean = float(baseline_batch(b, config, lam_matrix).mean())
            except InfeasibleConfig:
                continue
            if best is None or mean < best[1]:
                best = (b, mean)
    if best is None:
        raise InfeasibleConfig("no feasible baseline configuration")
    return best
