"""Cyclic assignment of W-blocks and share matrices to edge nodes.

All indices in index matrices and sets are 1-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import InfeasibleFill, InvalidParams


def wrap_index(x: int, e: int) -> int:
    """Map ``x`` into ``[1, e]`` by adding or subtracting ``e`` (so ``wrap_index(e, e) == e``)."""
    if e < 1:
        raise InvalidParams("e must be positive")
    return (x - 1) % e + 1


@dataclass(frozen=True)
class CyclicPermutation:
    """Permutation of ``[order]`` consisting of a single full-length cycle.

    ``image[i-1]`` is the image of ``i``.
    """

    image: tuple

    def __post_init__(self):
        n = len(self.image)
        if sorted(self.image) != list(range(1, n + 1)):
            raise InvalidParams("image is not a permutation")
        x, steps = 1, 0
        while True:
            x = self.image[x - 1]
            steps += 1
            if x == 1:
                break
        if steps != n:
            raise InvalidParams("permutation is not a single cycle")

    @property
    def order(self) -> int:
        return len(self.image)

    @classmethod
    def from_cycle(cls, cycle) -> "CyclicPermutation":
        cycle = list(cycle)
        image = [0] * len(cycle)
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            image[a - 1] = b
        return cls(tuple(image))

    @classmethod
    def default(cls, order: int) -> "CyclicPermutation":
        """The generator ``(1 order order-1 ... 2)``, i.e. ``i -> i-1`` cyclically."""
        return cls.from_cycle([1] + list(range(order, 1, -1)))

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    def power(self, d: int) -> tuple:
        """Image tuple of ``pi^d`` (negative ``d`` allowed); not itself a single cycle in general."""
        d %= self.order
        image = list(range(1, self.order + 1))
        for _ in range(d):
            image = [self.image[x - 1] for x in image]
        return tuple(image)


def _check_pi(pi, order):
    if pi is None:
        return CyclicPermutation.default(order)
    if pi.order != order:
        raise InvalidParams(f"generator has order {pi.order}, expected {order}")
    return pi


def _cyclic_rows(pi: CyclicPermutation, exponents, e: int) -> np.ndarray:
    rows = []
    for d in exponents:
        pw = pi.power(d)
        rows.append([pw[j - 1] for j in range(1, e + 1)])
    return np.array(rows, dtype=np.int64)


def build_iw(e: int, p: int, pi: CyclicPermutation | None = None) -> np.ndarray:
    """``p x e`` matrix with entry ``(i, j) = pi^(i-1)(j)``; column ``j`` lists EN j's blocks."""
    if not 1 <= p <= e:
        raise InvalidParams(f"need 1 <= p <= e, got p={p}, e={e}")
    pi = _check_pi(pi, e)
    return _cyclic_rows(pi, range(p), e)


def build_is(e: int, p: int, n: int, pi: CyclicPermutation | None = None):
    """Share index matrix, per-EN share sets and ``a``.

    Row ``d+1`` is ``pi^(d(e-p))`` applied to ``1..e`` for ``d = 0..ceil(e/p)-1``.
    The generator must have order ``max(n, e)``. Sets keep only entries in
    ``[n]`` in row order. ``a`` is the largest set size, which equals
    ``ceil(ceil(e/p) * n / e)`` whenever ``n <= e``.
    """
    if not 1 <= p <= e or n < 1:
        raise InvalidParams(f"invalid (e, p, n) = ({e}, {p}, {n})")
    pi = _check_pi(pi, max(n, e))
    beta = math.ceil(e / p) - 1
    mat = _cyclic_rows(pi, [d * (e - p) for d in range(beta + 1)], e)
    sets = tuple(tuple(int(h) for h in mat[:, j] if h <= n) for j in range(e))
    a = max(len(s) for s in sets)
    return mat, sets, a


def share_count(e: int, p: int, n: int) -> int:
    """Closed-form number of share matrices per EN, ``ceil(ceil(e/p) n / e)``."""
    return -(-(-(-e // p)) * n // e)


def build_ic(e: int, p: int, n_prime: int, pi_c: CyclicPermutation | None = None) -> np.ndarray:
    """``p x e`` index matrix for the ``n'`` coded blocks of ``W``.

    ``n' >= e`` uses a cyclic generator of order ``n'`` truncated to ``e``
    columns. ``n' < e`` fills diagonals ``1..n'`` and completes the gaps
    greedily (row-major) with the least-used index absent from the column,
    smallest index first on ties. If the greedy counts end up more than one
    apart, filled gaps are relabelled along augmenting chains until they are not.
    """
    if not 1 <= p <= e:
        raise InvalidParams(f"need 1 <= p <= e, got p={p}, e={e}")
    if p > n_prime:
        raise InfeasibleFill(f"p={p} blocks per EN cannot be distinct with n'={n_prime}")
    if n_prime >= e:
        return _cyclic_rows(_check_pi(pi_c, n_prime), range(p), e)
    mat = np.zeros((p, e), dtype=np.int64)
    for i in range(p):
        for c in range(n_prime):
            mat[i, (i + c) % e] = c + 1
    counts = np.bincount(mat[mat > 0], minlength=n_prime + 1)
    holes = []
    for i in range(p):
        for j in range(e):
            if mat[i, j]:
                continue
            used = set(mat[:, j].tolist())
            options = [x for x in range(1, n_prime + 1) if x not in used]
            if not options:
                raise InfeasibleFill(f"column {j + 1} cannot avoid a duplicate")
            pick = min(options, key=lambda x: (counts[x], x))
            mat[i, j] = pick
            counts[pick] += 1
            holes.append((i, j))
    while counts[1:].max() - counts[1:].min() > 1:
        if not _rebalance(mat, counts, holes, n_prime):
            raise InfeasibleFill(f"no near-uniform fill for e={e}, p={p}, n'={n_prime}")
    return mat


def _rebalance(mat, counts, holes, n_prime) -> bool:
    """Shift one use from a most-used index to an index used at least two times
    less by relabelling a chain of filled gaps (breadth-first, smallest first)."""
    top = counts[1:].max()
    for src in range(1, n_prime + 1):
        if counts[src] != top:
            continue
        prev = {src: None}
        frontier = [src]
        while frontier:
            nxt = []
            for x in frontier:
                for i, j in holes:
                    if mat[i, j] != x:
                        continue
                    col = set(mat[:, j].tolist())
                    for z in range(1, n_prime + 1):
                        if z in prev or z in col:
                            continue
                        prev[z] = (x, i, j)
                        if counts[z] <= top - 2:
                            counts[z] += 1
                            counts[src] -= 1
                            while prev[z] is not None:
                                x0, i0, j0 = prev[z]
                                mat[i0, j0] = z
                                z = x0
                            return True
                        nxt.append(z)
            frontier = nxt
    return False


@dataclass(frozen=True)
class AssignmentPlan:
    """Which W-blocks and share matrices each EN stores, in processing order.

    ``n_blocks`` is ``e`` for the uncoded scheme and ``n'`` with coding on W.
    """

    e: int
    p: int
    n: int
    n_blocks: int
    a: int
    iw: np.ndarray
    is_: np.ndarray
    sets_w: tuple
    sets_s: tuple

    def phi_w(self, j: int, idx: int) -> int:
        return self.sets_w[j - 1][idx - 1]

    def phi_s(self, j: int, idx: int) -> int:
        return self.sets_s[j - 1][idx - 1]

    def multiplicity(self) -> np.ndarray:
        """``(n_blocks, n)`` count of ENs able to compute each IR ``(l, h)``."""
        rho = np.zeros((self.n_blocks, self.n), dtype=np.int64)
        for sw, ss in zip(self.sets_w, self.sets_s):
            for l in sw:
                for h in ss:
                    rho[l - 1, h - 1] += 1
        return rho

    def dump(self) -> str:
        lines = [f"e={self.e} p={self.p} n={self.n} blocks={self.n_blocks} a={self.a}", "I_w:"]
        lines += [" ".join(f"{v:2d}" for v in row) for row in self.iw]
        lines.append("I_s:")
        lines += [" ".join(f"{v:2d}" for v in row) for row in self.is_]
        for j in range(self.e):
            lines.append(f"EN {j + 1}: blocks {list(self.sets_w[j])} shares {list(self.sets_s[j])}")
        return "\n".join(lines)


def make_plan(e: int, p: int, n: int, n_blocks: int | None = None,
              pi: CyclicPermutation | None = None) -> AssignmentPlan:
    """Build a plan with the default generators unless ``pi`` is given.

    Without coding (``n_blocks`` omitted or equal to ``e`` and ``n <= e``)
    ``pi`` drives both matrices, as in the uncoded construction.
    """
    n_blocks = e if n_blocks is None else n_blocks
    if n_blocks == e and n <= e:
        pi = _check_pi(pi, e)
        iw = build_iw(e, p, pi)
        is_, sets_s, a = build_is(e, p, n, pi)
    else:
        iw = build_ic(e, p, n_blocks)
        is_, sets_s, a = build_is(e, p, n)
    sets_w = tuple(tuple(int(v) for v in iw[:, j]) for j in range(e))
    return AssignmentPlan(e, p, n, n_blocks, a, iw, is_, sets_w, sets_s)


@lru_cache(maxsize=4096)
def cached_plan(e: int, p: int, n: int, n_blocks: int | None = None) -> AssignmentPlan:
    return make_plan(e, p, n, n_blocks)


def coverage_check(plan: AssignmentPlan) -> bool:
    """True iff every share index meets every W-block at some EN holding both."""
    full = set(range(1, plan.n_blocks + 1))
    for h in range(1, plan.n + 1):
        got = set()
        for sw, ss in zip(plan.sets_w, plan.sets_s):
            if h in ss:
                got.update(sw)
        if got != full:
            return False
    return True
