import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privedge.exceptions import InconsistentShares, NotEnoughShares
from privedge.field import GF
from privedge.reed_solomon import RSCode, decoding_cost_ops

F7 = GF(7)


def test_encode_examples():
    assert RSCode(3, 1, F7).encode([5]).tolist() == [5, 5, 5]
    assert RSCode(3, 2, F7).encode([1, 1]).tolist() == [2, 3, 4]


def test_decode_examples():
    assert RSCode(3, 1, F7).decode_erasures({2: 5}).tolist() == [5]
    with pytest.raises(NotEnoughShares):
        RSCode(4, 3, F7).decode_erasures({1: 1, 2: 2})


def test_any_k_positions_recover_4_3():
    code = RSCode(4, 3, F7)
    msg = np.array([3, 0, 6])
    cw = code.encode(msg)
    for pos in itertools.combinations(range(1, 5), 3):
        assert code.decode_erasures({h: cw[h - 1] for h in pos}).tolist() == msg.tolist()


def test_extra_symbols_checked():
    code = RSCode(4, 2, F7)
    cw = code.encode([1, 2])
    bad = {1: cw[0], 2: cw[1], 3: (cw[2] + 1) % 7}
    with pytest.raises(InconsistentShares):
        code.decode_erasures(bad)


def test_cost_examples():
    assert decoding_cost_ops(4, 3) == 14
    assert decoding_cost_ops(2, 1) == 4
    for n in range(2, 10):
        assert decoding_cost_ops(n, n) == n * (Fraction(3, 2) * (n - 1).bit_length() - Fraction(3, 2))
    assert decoding_cost_ops(1, 1) == 0


def _naive_cost(n, k):
    lg = 0
    while 2 ** lg < n:
        lg += 1
    return n * (2 * (n - k) + 1.5 * lg - 1.5)


def test_cost_matches_formula():
    for n in range(2, 30):
        for k in range(1, n + 1):
            assert float(decoding_cost_ops(n, k)) == pytest.approx(_naive_cost(n, k), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))), st.data())
def test_roundtrip_all_erasures(nk, data):
    n, k = nk
    code = RSCode(n, k, F7)
    msg = np.array(data.draw(st.lists(st.integers(0, 6), min_size=k, max_size=k)))
    cw = code.encode(msg)
    for size in range(k, n + 1):
        for pos in itertools.combinations(range(1, n + 1), size):
            assert np.array_equal(code.decode_erasures({h: cw[h - 1] for h in pos}), msg)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.data())
def test_decode_is_linear(n, data):
    k = data.draw(st.integers(1, n))
    code = RSCode(n, k, F7)
    ints = st.integers(0, 6)
    a = np.array(data.draw(st.lists(ints, min_size=k, max_size=k)))
    b = np.array(data.draw(st.lists(ints, min_size=k, max_size=k)))
    al, be = data.draw(ints), data.draw(ints)
    word = (al * code.encode(a) + be * code.encode(b)) % 7
    pos = data.draw(st.permutations(range(1, n + 1)))[:k]
    got = code.decode_erasures({h: word[h - 1] for h in pos})
    assert np.array_equal(got, (al * a + be * b) % 7)
