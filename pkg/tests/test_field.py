import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from privedge.exceptions import DimensionMismatch, InvalidParams, ZeroInverse
from privedge.field import GF, is_prime

F7 = GF(7)


def test_add_mul_examples():
    assert F7.add(3, 5) == 1
    assert F7.add(0, 4) == 4
    assert GF(65537).add(65536, 1) == 0
    assert F7.mul(3, 5) == 1
    assert F7.mul(1, 6) == 6
    assert F7.mul(0, 6) == 0


def test_inverse():
    assert F7.inv(3) == 5
    assert F7.inv(1) == 1
    with pytest.raises(ZeroInverse):
        F7.inv(0)


def test_mat_vec_mul():
    assert F7.mat_vec_mul([[1, 2], [3, 4]], [1, 1]).tolist() == [3, 0]
    v = np.array([2, 5, 6])
    assert F7.mat_vec_mul(np.eye(3, dtype=int), v).tolist() == v.tolist()
    assert F7.mat_vec_mul(np.zeros((2, 3), dtype=int), v).tolist() == [0, 0]
    with pytest.raises(DimensionMismatch):
        F7.mat_vec_mul([[1, 2]], [1, 2, 3])


def test_field_axioms_exhaustive_q7():
    els = range(7)
    for a, b in itertools.product(els, els):
        assert F7.add(a, b) == F7.add(b, a)
        assert F7.mul(a, b) == F7.mul(b, a)
    for a, b, c in itertools.product(els, els, els):
        assert F7.add(F7.add(a, b), c) == F7.add(a, F7.add(b, c))
        assert F7.mul(F7.mul(a, b), c) == F7.mul(a, F7.mul(b, c))
        assert F7.mul(a, F7.add(b, c)) == F7.add(F7.mul(a, b), F7.mul(a, c))
    for a in range(1, 7):
        assert F7.mul(a, F7.inv(a)) == 1
        assert F7.add(a, F7.neg(a)) == 0


def test_rejects_composite_modulus():
    assert not is_prime(1) and not is_prime(9) and is_prime(65537)
    with pytest.raises(InvalidParams):
        GF(8)


def test_points_distinct_nonzero():
    pts = GF(11).points(10)
    assert len(set(pts.tolist())) == 10 and 0 not in pts
    with pytest.raises(InvalidParams):
        GF(11).points(11)


@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_mat_vec_mul_linear(rows, cols, data):
    q = 65537
    F = GF(q)
    ints = st.integers(0, q - 1)
    M = np.array(data.draw(st.lists(st.lists(ints, min_size=cols, max_size=cols),
                                    min_size=rows, max_size=rows)))
    u = np.array(data.draw(st.lists(ints, min_size=cols, max_size=cols)))
    v = np.array(data.draw(st.lists(ints, min_size=cols, max_size=cols)))
    al, be = data.draw(ints), data.draw(ints)
    lhs = F.mat_vec_mul(M, (al * u + be * v) % q)
    rhs = (al * F.mat_vec_mul(M, u) + be * F.mat_vec_mul(M, v)) % q
    assert np.array_equal(lhs, rhs)


def test_solve_roundtrip():
    F = GF(65537)
    rng = np.random.default_rng(1)
    A = np.vander(np.arange(1, 6), increasing=True) % F.q
    x = F.random(rng, (5, 3))
    assert np.array_equal(F.solve(A, F.matmul(A, x)), x)
