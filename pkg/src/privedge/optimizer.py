"""Grid search over private coding scheme tuples with common random numbers."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator

from .assignment import cached_plan, coverage_check
from .engine import peel_closure, simulate
from .exceptions import EmptySpace, InvalidParams
from .latency import SystemConfig, op_latency, scheme1_batch, setup_matrix, upload_arrivals
from .reed_solomon import decoding_cost_ops
from .schemes import PrivateCodingScheme, kernel_plan

TABLE_COLUMNS = ("variant", "e", "p", "n", "k", "n_prime", "k_prime", "t", "z",
                 "mean", "stderr", "trials")


@dataclass(frozen=True)
class SearchSpace:
    """Tuples searched for one scheme variant and privacy level.

    Variant 3 lets ``n`` and ``n'`` range up to ``e + p``; ``n_max`` and
    ``n_prime_max`` tighten those bounds. ``e_values`` restricts the number
    of contacted ENs.
    """

    variant: int
    z: int = 1
    e_max: int = 9
    mu: Fraction = Fraction(2, 3)
    n_max: int | None = None
    n_prime_max: int | None = None
    e_values: tuple | None = None

    def __post_init__(self):
        if self.variant not in (1, 2, 3):
            raise InvalidParams(f"unknown scheme variant {self.variant}")
        if self.z < 1:
            raise InvalidParams("z must be >= 1")
        if self.e_max < 2:
            raise InvalidParams("e_max must be >= 2")
        object.__setattr__(self, "mu", Fraction(self.mu).limit_denominator(10**6))

    @classmethod
    def from_config(cls, variant: int, z: int, config: SystemConfig, **kw) -> "SearchSpace":
        return cls(variant=variant, z=z, e_max=config.e_max, mu=config.mu, **kw)

    def e_range(self):
        es = range(2, self.e_max + 1)
        if self.e_values is not None:
            es = [e for e in es if e in set(self.e_values)]
        return es


def max_t(plan) -> int:
    """Smallest number of IRs any block can collect when every EN finishes."""
    held = np.zeros(plan.n_blocks, dtype=int)
    for ws, ss in zip(plan.sets_w, plan.sets_s):
        for b in ws:
            held[b - 1] += len(ss)
    return int(held.min())


def full_pattern_decodable(plan, k: int, k_prime: int) -> bool:
    mask = plan.multiplicity() > 0
    peel_closure(mask, k, k_prime)
    return bool(mask.all())


def enumerate_feasible(space: SearchSpace) -> list[PrivateCodingScheme]:
    out = []
    z = space.z
    for e in space.e_range():
        if space.variant in (1, 2):
            for p in range(1, math.floor(space.mu * e) + 1):
                for n in range(2, e + 1):
                    plan = cached_plan(e, p, n, e)
                    k = plan.a * z + 1
                    if k > n or not coverage_check(plan):
                        continue
                    if space.variant == 2:
                        out.append(PrivateCodingScheme(2, e, p, n, k, z))
                        continue
                    for t in range(k, min(plan.a * p, max_t(plan)) + 1):
                        out.append(PrivateCodingScheme(1, e, p, n, k, z, t))
        else:
            for k_prime in range(1, e + 1):
                for p in range(1, min(e, math.floor(space.mu * k_prime)) + 1):
                    n_hi = e + p if space.n_max is None else min(e + p, space.n_max)
                    np_hi = e + p if space.n_prime_max is None else min(e + p, space.n_prime_max)
                    for n_prime in range(k_prime, np_hi + 1):
                        for n in range(2, n_hi + 1):
                            plan = cached_plan(e, p, n, n_prime)
                            k = plan.a * z + 1
                            if k > n or not full_pattern_decodable(plan, k, k_prime):
                                continue
                            out.append(PrivateCodingScheme(3, e, p, n, k, z, None,
                                                           n_prime, k_prime))
    if not out:
        raise EmptySpace(f"no feasible tuple for variant {space.variant}, z={z}, "
                         f"e_max={space.e_max}")
    out.sort(key=_order_key)
    return out


def _order_key(s: PrivateCodingScheme):
    return (s.variant, s.e, s.n, s.p, s.k, s.n_prime or 0, s.k_prime or 0, s.t or 0)


def scheme_row(s: PrivateCodingScheme) -> dict:
    return {"variant": s.variant, "e": s.e, "p": s.p, "n": s.n, "k": s.k,
            "n_prime": s.n_prime if s.n_prime is not None else "",
            "k_prime": s.k_prime if s.k_prime is not None else "",
            "t": s.t if s.t is not None else "", "z": s.z if s.z is not None else ""}


def evaluate(schemes, config: SystemConfig, lam_matrix) -> dict:
    """Total latency samples for every scheme; variant-1 tuples sharing ``(e, p, n)``
    are evaluated in one pass over the trials."""
    out = {}
    groups: dict = {}
    for s in schemes:
        if s.variant == 1:
            groups.setdefault((s.e, s.p, s.n, s.k), []).append(s)
        else:
            out[s] = simulate(s, config, lam_matrix)
    for (e, p, n, k), members in groups.items():
        members = sorted(members, key=lambda s: s.t)
        kp = kernel_plan(e, p, n, e)
        ts = np.array([s.t for s in members], dtype=np.int64)
        lam = np.ascontiguousarray(np.asarray(lam_matrix, dtype=float)[:, :e] / config.tau)
        arr = upload_arrivals(e, max(kp.plan.a, 1), config.gamma, config.r)
        rows = config.m / e
        comp, inv = scheme1_batch(lam, arr, kp.counts, kp.w_idx, kp.s_idx, e, n, k, rows,
                                  config.users(e), ts)
        dec = op_latency(config.delta, config.r) * config.m * float(decoding_cost_ops(n, k))
        total = comp + config.gamma * rows * inv + dec
        for i, s in enumerate(members):
            out[s] = total[:, i]
    return out


def _mean_stderr(x: np.ndarray):
    if not np.isfinite(x).all():
        return math.inf, math.inf
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return mean, se


@dataclass
class OptimizationResult:
    best: PrivateCodingScheme
    mean: float
    stderr: float
    table: list = field(default_factory=list)

    def to_csv(self) -> str:
        return table_csv(self.table)


def table_csv(table) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in table:
        w.writerow({c: _fmt(row[c]) for c in TABLE_COLUMNS})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _lam_for(e_max: int, config: SystemConfig, trials: int, seed: int | None):
    e = max(e_max, config.e_max)
    return setup_matrix(trials, e, config.eta, config.seed if seed is None else seed)


def optimize(space: SearchSpace, config: SystemConfig, trials: int,
             lam_matrix=None) -> OptimizationResult:
    """Exhaustive search for the tuple with the smallest sample-mean latency.

    Every tuple sees the same setup-time draws (row ``i`` of ``lam_matrix``).
    Ties go to the smaller ``e``, then the smaller ``n``.
    """
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    schemes = enumerate_feasible(space)
    if lam_matrix is None:
        lam_matrix = _lam_for(space.e_max, config, trials, None)
    samples = evaluate(schemes, config, lam_matrix)
    table = []
    for s in schemes:
        mean, se = _mean_stderr(samples[s])
        row = scheme_row(s)
        row.update(mean=mean, stderr=se, trials=int(len(samples[s])))
        table.append(row)
    best_i = min(range(len(schemes)),
                 key=lambda i: (table[i]["mean"], schemes[i].e, schemes[i].n, i))
    return OptimizationResult(schemes[best_i], table[best_i]["mean"],
                              table[best_i]["stderr"], table)


def exceedance(samples: np.ndarray, deadlines) -> np.ndarray:
    """Fraction of trials whose latency is strictly above each deadline."""
    s = np.sort(np.asarray(samples, dtype=float))
    d = np.asarray(deadlines, dtype=float)
    return 1.0 - np.searchsorted(s, d, side="right") / s.size


@dataclass
class DeadlinePoint:
    deadline: float
    probability: float
    scheme: PrivateCodingScheme


def deadline_profile(target, config: SystemConfig, deadlines, trials: int,
                     screen_trials: int = 10_000, candidates: int = 5,
                     lam_matrix=None) -> list[DeadlinePoint]:
    """Probability that the total latency exceeds each deadline.

    ``target`` is a fixed scheme or a search space. For a space, every tuple
    is first ranked on ``screen_trials`` independent draws; for each deadline
    the ``candidates`` best tuples are re-run on ``trials`` draws and the
    lowest exceedance is reported.
    """
    deadlines = [float(d) for d in deadlines]
    if lam_matrix is None:
        lam_matrix = _lam_for(config.e_max, config, trials, None)
    if isinstance(target, PrivateCodingScheme):
        probs = exceedance(evaluate([target], config, lam_matrix)[target], deadlines)
        return [DeadlinePoint(d, float(pr), target) for d, pr in zip(deadlines, probs)]
    schemes = enumerate_feasible(target)
    screen = _lam_for(target.e_max, config, screen_trials, config.seed + 1)
    coarse = evaluate(schemes, config, screen)
    coarse_p = {s: exceedance(v, deadlines) for s, v in coarse.items()}
    coarse_mean = {s: float(np.mean(v)) for s, v in coarse.items()}
    picks = []
    for i in range(len(deadlines)):
        ranked = sorted(range(len(schemes)),
                        key=lambda j: (coarse_p[schemes[j]][i], coarse_mean[schemes[j]], j))
        picks.append([schemes[j] for j in ranked[:candidates]])
    pool = sorted({s for ps in picks for s in ps}, key=_order_key)
    fine = evaluate(pool, config, lam_matrix)
    fine_p = {s: exceedance(v, deadlines) for s, v in fine.items()}
    out = []
    for i, d in enumerate(deadlines):
        best = min(picks[i], key=lambda s: (fine_p[s][i], s.e, s.n, _order_key(s)))
        out.append(DeadlinePoint(d, float(fine_p[best][i]), best))
    return out


class SchemeOptimizer(BaseEstimator):
    """Estimator wrapper: ``fit`` searches the space, ``predict`` returns the
    latency of the selected tuple for each row of setup times."""

    def __init__(self, variant=1, z=1, trials=10_000, config=None):
        self.variant = variant
        self.z = z
        self.trials = trials
        self.config = config

    def _config(self):
        return self.config if self.config is not None else SystemConfig()

    def fit(self, X=None, y=None):
        cfg = self._config()
        space = SearchSpace.from_config(self.variant, self.z, cfg)
        lam = None if X is None else _check_setup(X, cfg.e_max)
        res = optimize(space, cfg, self.trials if lam is None else lam.shape[0], lam)
        self.result_ = res
        self.best_ = res.best
        self.mean_ = res.mean
        return self

    def predict(self, X):
        if not hasattr(self, "best_"):
            raise InvalidParams("call fit before predict")
        lam = _check_setup(X, self.best_.e)
        return evaluate([self.best_], self._config(), lam)[self.best_]

    def score(self, X, y=None):
        return -float(np.mean(self.predict(X)))


def _check_setup(X, e: int) -> np.ndarray:
    lam = np.asarray(X, dtype=float)
    if lam.ndim != 2 or lam.shape[1] < e:
        raise InvalidParams(f"setup times must be a 2-D array with at least {e} columns")
    if (lam < 0).any():
        raise InvalidParams("setup times must be nonnegative")
    return lam
