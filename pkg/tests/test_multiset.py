import numpy as np
import pytest
from hypothesis import given, strategies as st

from tilekit.multiset import Multiset, ap, from_set, whole


def naive_convolve(a, b, M):
    out = [0] * M
    for x in range(M):
        for y in range(M):
            out[(x + y) % M] += a[x] * b[y]
    return out


weights = st.lists(st.integers(-3, 3), min_size=12, max_size=12)


@given(weights, weights)
def test_convolve_matches_naive(wa, wb):
    A, B = Multiset(12, wa), Multiset(12, wb)
    assert list((A * B).weights) == naive_convolve(wa, wb, 12)


@given(weights, st.integers(0, 11))
def test_translate_and_reduce(w, t):
    A = Multiset(12, w)
    assert A.translate(t).translate(-t) == A
    assert A.reduce_mod(4).total == A.total
    assert list(A.reduce_mod(4).weights) == [sum(w[k::4]) for k in range(4)]


def test_basic_algebra():
    A = from_set([0, 1], 6)
    B = from_set([0, 2, 4], 6)
    assert A * B == whole(6)
    assert (A + A).weights[0] == 2 and not (A + A).is_set()
    assert (A - A).total == 0
    assert ap(12, 3, 4) == from_set([0, 3, 6, 9], 12)
    assert A.dilate(3).weights[3] == 1


def test_json_roundtrip():
    A = from_set([0, 3, 5], 10)
    assert Multiset.from_json(A.to_json()) == A
    W = Multiset.from_weights(10, {1: 2, 4: -1})
    assert Multiset.from_json(W.to_json()) == W


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        from_set([0, 0], 6)
    with pytest.raises(ValueError):
        from_set([6], 6)
    with pytest.raises(ValueError):
        Multiset(6, np.zeros(5))


def test_weights_read_only():
    A = from_set([0, 1], 4)
    with pytest.raises(ValueError):
        A.weights[0] = 3
