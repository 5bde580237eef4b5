"""Prime field arithmetic.

Elements are plain Python ints (or int64 numpy arrays) holding canonical
representatives in ``[0, q)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, InvalidParams, ZeroInverse

DEFAULT_Q = 65537
# keeps r * q**2 well inside int64 for the matrix products used here
_MAX_Q = 2**31


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class GF:
    """The field GF(q) for a prime ``q``.

    Evaluation points default to ``1, 2, ..., q-1``.
    """

    q: int = DEFAULT_Q

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or not is_prime(int(self.q)):
            raise InvalidParams(f"field modulus must be prime, got {self.q!r}")
        if self.q >= _MAX_Q:
            raise InvalidParams(f"modulus {self.q} too large for int64 matrix products")

    @property
    def evaluation_points(self) -> range:
        return range(1, self.q)

    def points(self, n: int) -> np.ndarray:
        if n > self.q - 1:
            raise InvalidParams(f"need {n} distinct nonzero points but q={self.q}")
        return np.arange(1, n + 1, dtype=np.int64)

    def element(self, a) -> int:
        a = int(a)
        if not 0 <= a < self.q:
            raise InvalidParams(f"{a} is not an element of GF({self.q})")
        return a

    def add(self, a, b):
        return (a + b) % self.q

    def sub(self, a, b):
        return (a - b) % self.q

    def neg(self, a):
        return (-a) % self.q

    def mul(self, a, b):
        return (a * b) % self.q

    def inv(self, a) -> int:
        a = int(a) % self.q
        if a == 0:
            raise ZeroInverse("0 has no multiplicative inverse")
        return pow(a, self.q - 2, self.q)

    def pow(self, a, e: int) -> int:
        return pow(int(a) % self.q, e, self.q)

    def random(self, rng: np.random.Generator, size=None):
        return rng.integers(0, self.q, size=size, dtype=np.int64)

    def asarray(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.int64)
        return arr % self.q

    def matmul(self, a, b) -> np.ndarray:
        a = self.asarray(a)
        b = self.asarray(b)
        if a.shape[-1] != b.shape[0]:
            raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
        return (a @ b) % self.q

    def mat_vec_mul(self, M, v) -> np.ndarray:
        M = self.asarray(M)
        v = self.asarray(v)
        if M.ndim != 2 or v.ndim != 1:
            raise DimensionMismatch("expected a matrix and a vector")
        return self.matmul(M, v)

    def solve(self, A, B) -> np.ndarray:
        """Solve ``A X = B`` for square invertible ``A`` by Gauss-Jordan elimination."""
        A = self.asarray(A).copy()
        B = self.asarray(B).copy()
        n = A.shape[0]
        if A.shape != (n, n) or B.shape[0] != n:
            raise DimensionMismatch(f"bad system shapes {A.shape}, {B.shape}")
        squeeze = B.ndim == 1
        if squeeze:
            B = B[:, None]
        q = self.q
        for col in range(n):
            pivot = next((i for i in range(col, n) if A[i, col] != 0), None)
            if pivot is None:
                raise ZeroInverse("singular matrix")
            if pivot != col:
                A[[col, pivot]] = A[[pivot, col]]
                B[[col, pivot]] = B[[pivot, col]]
            s = self.inv(A[col, col])
            A[col] = A[col] * s % q
            B[col] = B[col] * s % q
            for i in range(n):
                if i != col and A[i, col]:
                    f = A[i, col]
                    A[i] = (A[i] - f * A[col]) % q
                    B[i] = (B[i] - f * B[col]) % q
        return B[:, 0] if squeeze else B
