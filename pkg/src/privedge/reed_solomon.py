"""Nonsystematic Reed-Solomon codes over a prime field (erasure decoding only)."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .exceptions import DimensionMismatch, InconsistentShares, InvalidParams, NotEnoughShares
from .field import GF


def ceil_log2(n: int) -> int:
    return (int(n) - 1).bit_length() if n > 0 else 0


def decoding_cost_ops(n: int, k: int) -> Fraction:
    """Field operations to decode one length-``n`` codeword.

    Berlekamp-Massey (``n(n-k)`` mult, ``n(n-k-1)`` add) plus a DFT
    (``n/2 (ceil(log2 n) - 1)`` mult, ``n ceil(log2 n)`` add). A length-1
    code carries its symbol in the clear and costs nothing.
    """
    if k < 1 or n < 1:
        raise InvalidParams(f"invalid code parameters ({n}, {k})")
    if k > n:
        raise InvalidParams(f"k={k} exceeds n={n}")
    if n == 1:
        return Fraction(0)
    lg = ceil_log2(n)
    return (n * (n - k) + n * (n - k - 1)
            + Fraction(n, 2) * (lg - 1) + n * lg)


@dataclass(frozen=True)
class RSCode:
    """An ``(n, k)`` RS code evaluating ``f(x) = m_0 + m_1 x + ... + m_{k-1} x^{k-1}``
    at the first ``n`` evaluation points of ``field``.

    Positions are 1-based, matching share indices ``h`` in ``[n]``.
    """

    n: int
    k: int
    field: GF = field(default_factory=GF)

    def __post_init__(self):
        if not (1 <= self.k <= self.n):
            raise InvalidParams(f"need 1 <= k <= n, got ({self.n}, {self.k})")
        if self.n > self.field.q - 1:
            raise InvalidParams(f"n={self.n} exceeds q-1={self.field.q - 1}")

    @property
    def points(self) -> np.ndarray:
        return self.field.points(self.n)

    @property
    def generator(self) -> np.ndarray:
        """``n x k`` Vandermonde matrix ``G[i, c] = alpha_i ** c``."""
        q = self.field.q
        G = np.ones((self.n, self.k), dtype=np.int64)
        for c in range(1, self.k):
            G[:, c] = G[:, c - 1] * self.points % q
        return G

    def encode(self, message) -> np.ndarray:
        """Encode along axis 0: a ``(k, ...)`` array becomes ``(n, ...)``."""
        msg = self.field.asarray(message)
        if msg.shape[0] != self.k:
            raise DimensionMismatch(f"message has {msg.shape[0]} symbols, code needs {self.k}")
        flat = msg.reshape(self.k, -1)
        return self.field.matmul(self.generator, flat).reshape((self.n,) + msg.shape[1:])

    def decode_erasures(self, available: Mapping[int, object] | Iterable) -> np.ndarray:
        """Recover the message from ``{position: symbol}`` (or ``(position, symbol)`` pairs).

        Symbols may be arrays; the result then has shape ``(k,) + symbol.shape``.
        When more than ``k`` symbols are given the extras are checked against
        the re-encoded codeword.
        """
        items = dict(available.items() if isinstance(available, Mapping) else available)
        if len(items) < self.k:
            raise NotEnoughShares(f"{len(items)} symbols available, need {self.k}")
        for pos in items:
            if not 1 <= pos <= self.n:
                raise InvalidParams(f"position {pos} outside [1, {self.n}]")
        positions = sorted(items)
        used = positions[: self.k]
        values = np.stack([self.field.asarray(items[h]) for h in used])
        shape = values.shape[1:]
        G = self.generator
        msg = self.field.solve(G[np.array(used) - 1], values.reshape(self.k, -1))
        msg = msg.reshape((self.k,) + shape)
        if len(positions) > self.k:
            cw = self.encode(msg)
            for h in positions[self.k:]:
                if not np.array_equal(cw[h - 1], self.field.asarray(items[h])):
                    raise InconsistentShares(f"symbol at position {h} is not on the codeword")
        return msg

    def is_codeword(self, word) -> bool:
        word = self.field.asarray(word)
        msg = self.decode_erasures({h + 1: word[h] for h in range(self.k)})
        return np.array_equal(self.encode(msg), word)
