"""Private coding scheme tuples and their kernel-ready assignment arrays."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .assignment import AssignmentPlan, cached_plan
from .exceptions import InvalidParams

VARIANTS = (1, 2, 3)


@dataclass(frozen=True, order=True)
class PrivateCodingScheme:
    """``variant`` 1: download after computing; 2: priority queue; 3: queue plus coding on W.

    For variants 1 and 2, ``n_prime``/``k_prime`` are unset and W is split
    into ``e`` uncoded blocks.
    """

    variant: int
    e: int
    p: int
    n: int
    k: int
    z: int | None = None
    t: int | None = None
    n_prime: int | None = None
    k_prime: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParams(f"unknown scheme variant {self.variant}")
        if not 1 <= self.k <= self.n:
            raise InvalidParams(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.variant == 1 and self.t is None:
            raise InvalidParams("scheme 1 needs t")
        if self.variant == 3:
            if self.n_prime is None or self.k_prime is None:
                raise InvalidParams("scheme 3 needs (n', k')")
            if not 1 <= self.k_prime <= self.n_prime:
                raise InvalidParams("need 1 <= k' <= n'")

    @property
    def n_blocks(self) -> int:
        return self.n_prime if self.variant == 3 else self.e

    @property
    def blocks_needed(self) -> int:
        """Column-code dimension: ``k'`` when W is coded, otherwise every block."""
        return self.k_prime if self.variant == 3 else self.e

    def block_rows(self, m: int) -> float:
        return m / self.blocks_needed

    def plan(self) -> AssignmentPlan:
        return cached_plan(self.e, self.p, self.n, self.n_blocks)

    def as_row(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KernelPlan:
    """0-based index arrays consumed by the numba kernels."""

    plan: AssignmentPlan
    w_idx: np.ndarray  # e x p block indices in processing order
    s_idx: np.ndarray  # e x a share indices, -1 padded
    counts: np.ndarray  # shares held per EN


@lru_cache(maxsize=4096)
def kernel_plan(e: int, p: int, n: int, n_blocks: int) -> KernelPlan:
    plan = cached_plan(e, p, n, n_blocks)
    w_idx = np.array(plan.sets_w, dtype=np.int64) - 1
    s_idx = np.full((e, max(plan.a, 1)), -1, dtype=np.int64)
    counts = np.zeros(e, dtype=np.int64)
    for j, ss in enumerate(plan.sets_s):
        counts[j] = len(ss)
        s_idx[j, : len(ss)] = np.array(ss) - 1
    return KernelPlan(plan, w_idx, s_idx, counts)


def kernel_plan_for(scheme: PrivateCodingScheme) -> KernelPlan:
    return kernel_plan(scheme.e, scheme.p, scheme.n, scheme.n_blocks)
