"""Vector-valued Shamir secret sharing and product-code recovery."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DimensionMismatch, NotEnoughShares, SubsetTooLarge
from .field import GF
from .reed_solomon import RSCode


@dataclass
class UserData:
    """Private vector ``x`` of one user plus its ``k-1`` random vectors."""

    x: np.ndarray
    randomness: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.int64)
        self.randomness = np.asarray(self.randomness, dtype=np.int64).reshape(-1, self.x.shape[0])

    @classmethod
    def random(cls, r: int, k: int, field: GF, rng: np.random.Generator, x=None):
        x = field.random(rng, r) if x is None else x
        return cls(x, field.random(rng, (k - 1, r)))


@dataclass
class ShareMatrix:
    h: int
    S: np.ndarray  # r x u, column i is user i's h-th share


def make_shares(users: Sequence[UserData], code: RSCode) -> list[ShareMatrix]:
    if not users:
        raise DimensionMismatch("no users")
    r = users[0].x.shape[0]
    cols = []
    for usr in users:
        if usr.x.shape != (r,) or usr.randomness.shape != (code.k - 1, r):
            raise DimensionMismatch(
                f"user data must be length {r} with {code.k - 1} random vectors")
        cols.append(code.encode(np.vstack([usr.x[None, :], usr.randomness])))  # n x r
    shares = np.stack(cols, axis=-1)  # n x r x u
    return [ShareMatrix(h + 1, shares[h]) for h in range(code.n)]


def recover_results(irs: Mapping[int, np.ndarray], code: RSCode) -> np.ndarray:
    """Recover ``W_l x_i`` (one column per user) from IRs ``{h: W_l S^(h)}``."""
    if len(irs) < code.k:
        raise NotEnoughShares(f"{len(irs)} distinct shares, need {code.k}")
    shapes = {np.shape(v) for v in irs.values()}
    if len(shapes) != 1:
        raise DimensionMismatch(f"intermediate results differ in shape: {shapes}")
    return code.decode_erasures(irs)[0]


def privacy_histogram(secret: int, subset, code: RSCode) -> Counter:
    """Exact distribution of the shares at ``subset`` over all randomness choices."""
    subset = sorted(subset)
    if len(subset) >= code.k:
        raise SubsetTooLarge(f"|subset|={len(subset)} reveals the secret for k={code.k}")
    q = code.field.q
    hist: Counter = Counter()
    idx = np.array(subset, dtype=np.int64) - 1
    for rand in itertools.product(range(q), repeat=code.k - 1):
        cw = code.encode(np.array((secret,) + rand))
        hist[tuple(int(v) for v in cw[idx])] += 1
    return hist


def peel_pattern(known, k: int, k_prime: int):
    """Iterative row/column erasure decoding on a known-cell mask.

    Rows are ``(n, k)`` codewords and columns ``(n', k')`` codewords. Each
    sweep decodes rows then columns in ascending order; only lines with at
    least one unknown cell are decoded. Returns ``(closure, events)`` where
    events are ``("row" | "column", index)`` with 1-based indices.
    """
    mask = np.array(known, dtype=bool, copy=True)
    events = []
    progress = True
    while progress:
        progress = False
        for i in range(mask.shape[0]):
            cnt = mask[i].sum()
            if k <= cnt < mask.shape[1]:
                mask[i] = True
                events.append(("row", i + 1))
                progress = True
        for j in range(mask.shape[1]):
            cnt = mask[:, j].sum()
            if k_prime <= cnt < mask.shape[0]:
                mask[:, j] = True
                events.append(("column", j + 1))
                progress = True
    return mask, events


@dataclass
class ProductCodeArray:
    """One user's ``n' x n`` array of blocks ``C_l s^(h)``.

    ``cells[l-1, h-1]`` holds the block (length ``m/k'``); ``known`` marks
    which cells are available.
    """

    cells: np.ndarray
    known: np.ndarray
    row_code: RSCode
    col_code: RSCode

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int64)
        self.known = np.asarray(self.known, dtype=bool)
        if self.cells.shape[:2] != (self.col_code.n, self.row_code.n):
            raise DimensionMismatch(
                f"array is {self.cells.shape[:2]}, codes need {(self.col_code.n, self.row_code.n)}")
        if self.known.shape != self.cells.shape[:2]:
            raise DimensionMismatch("known mask does not match the cell grid")

    def erased(self, keep) -> "ProductCodeArray":
        """Copy with only the cells in ``keep`` (1-based ``(l, h)`` pairs) marked known."""
        mask = np.zeros_like(self.known)
        for l, h in keep:
            mask[l - 1, h - 1] = True
        cells = np.where(mask[..., None], self.cells, 0)
        return ProductCodeArray(cells, mask, self.row_code, self.col_code)


def build_product_array(W, user_shares, row_code: RSCode, col_code: RSCode) -> ProductCodeArray:
    """Encode ``W`` into ``n'`` blocks and multiply each with every share of one user.

    ``user_shares`` is the ``n x r`` array ``(s^(1), ..., s^(n))``.
    """
    fld = row_code.field
    W = fld.asarray(W)
    m, r = W.shape
    kp = col_code.k
    if m % kp:
        raise DimensionMismatch(f"m={m} is not divisible by k'={kp}")
    C = col_code.encode(W.reshape(kp, m // kp, r))  # n' x m/k' x r
    S = fld.asarray(user_shares)
    if S.shape != (row_code.n, r):
        raise DimensionMismatch(f"shares must be {(row_code.n, r)}, got {S.shape}")
    cells = np.einsum("abr,hr->ahb", C, S) % fld.q
    return ProductCodeArray(cells, np.ones(cells.shape[:2], dtype=bool), row_code, col_code)


@dataclass
class PeelResult:
    recovered: bool
    array: ProductCodeArray
    events: list


def peel_product_code(array: ProductCodeArray) -> PeelResult:
    """Fill unknown cells by alternating row and column erasure decoding."""
    cells = array.cells.copy()
    known = array.known.copy()
    rc, cc = array.row_code, array.col_code
    events = []
    progress = True
    while progress:
        progress = False
        for i in range(known.shape[0]):
            cnt = known[i].sum()
            if rc.k <= cnt < known.shape[1]:
                avail = {h + 1: cells[i, h] for h in np.flatnonzero(known[i])}
                cells[i] = rc.encode(rc.decode_erasures(avail))
                known[i] = True
                events.append(("row", i + 1))
                progress = True
        for j in range(known.shape[1]):
            cnt = known[:, j].sum()
            if cc.k <= cnt < known.shape[0]:
                avail = {l + 1: cells[l, j] for l in np.flatnonzero(known[:, j])}
                cells[:, j] = cc.encode(cc.decode_erasures(avail))
                known[:, j] = True
                events.append(("column", j + 1))
                progress = True
    out = ProductCodeArray(cells, known, rc, cc)
    return PeelResult(bool(known.all()), out, events)


def recover_from_product(array: ProductCodeArray) -> np.ndarray:
    """``W x`` from a fully known product array: row-decode ``k'`` rows, then one column decode."""
    if not array.known.all():
        raise NotEnoughShares("array is not fully recovered")
    rc, cc = array.row_code, array.col_code
    secrets = {}
    for l in range(cc.k):
        row = {h + 1: array.cells[l, h] for h in range(rc.k)}
        secrets[l + 1] = rc.decode_erasures(row)[0]
    return cc.decode_erasures(secrets).reshape(-1)


class SecretSharer(TransformerMixin, BaseEstimator):
    """Shamir sharing of row vectors as a scikit-learn transformer.

    ``transform`` maps a ``(u, r)`` data matrix to the ``(n, r, u)`` stack of
    share matrices ``S^(1..n)``; ``inverse_transform`` recovers the data from
    any ``k`` of them.
    """

    def __init__(self, n=3, k=2, q=65537, random_state=None):
        self.n = n
        self.k = k
        self.q = q
        self.random_state = random_state

    def fit(self, X, y=None):
        X = np.asarray(X)
        if X.ndim != 2:
            raise DimensionMismatch("expected a 2-D (users x r) array")
        self.code_ = RSCode(self.n, self.k, GF(self.q))
        self.n_features_in_ = X.shape[1]
        self._rng = np.random.default_rng(self.random_state)
        return self

    def transform(self, X):
        check_is_fitted(self, "code_")
        X = self.code_.field.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"expected {self.n_features_in_} features")
        users = [UserData.random(X.shape[1], self.k, self.code_.field, self._rng, x=row) for row in X]
        return np.stack([s.S for s in make_shares(users, self.code_)])

    def inverse_transform(self, shares, positions=None):
        check_is_fitted(self, "code_")
        shares = np.asarray(shares)
        positions = range(1, shares.shape[0] + 1) if positions is None else positions
        return recover_results(dict(zip(positions, shares)), self.code_).T
