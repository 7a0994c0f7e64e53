from math import gcd

import pytest
from hypothesis import given, strategies as st

from tilekit.zmod import euler_phi, factor, mobius, radical


def naive_phi(n):
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


def naive_mobius(n):
    # sum of primitive n-th roots of unity, computed exactly via the recursion sum_{d|n} mu(d) = [n == 1]
    vals = {1: 1}
    for k in range(2, n + 1):
        vals[k] = -sum(vals[d] for d in range(1, k) if k % d == 0)
    return vals[n]


@pytest.mark.parametrize("n", range(1, 80))
def test_phi_and_mobius_against_naive(n):
    assert euler_phi(n) == naive_phi(n)
    assert mobius(n) == naive_mobius(n)


def test_factor_examples():
    m = factor(225)
    assert m.primes == ((3, 2), (5, 2))
    assert m.cofactors == (25, 9)
    assert factor(11025).primes == ((3, 2), (5, 2), (7, 2))
    assert radical(72) == 6
    with pytest.raises(ValueError):
        factor(1)


@given(st.sampled_from([12, 18, 36, 60, 72, 90, 225, 900]), st.data())
def test_coords_roundtrip(M, data):
    m = factor(M)
    x = data.draw(st.integers(0, M - 1))
    c = m.to_coords(x)
    assert m.from_coords(c) == x
    for i in range(m.K):
        assert m.pi(x, i) == c.pi[i]


@given(st.sampled_from([12, 18, 36, 72, 108, 144, 900]), st.data())
def test_gcd_via_digits(M, data):
    m = factor(M)
    x = data.draw(st.integers(0, M - 1))
    y = data.draw(st.integers(0, M - 1))
    assert m.gcd_via_digits(x, y) == (gcd(x - y, M) or M)


def test_geometry_sizes():
    m = factor(900)
    x = 7
    assert len(m.fiber(x, 1)) == 3
    assert len(m.line(x, 2)) == 25
    assert len(m.plane(x, 0, 2)) == 225
    assert m.top_grid(900) == 30
    assert m.top_grid(60) == 2
    # a line moves only its own coordinate
    for y in m.line(x, 0):
        assert m.pi(y, 1) == m.pi(x, 1) and m.pi(y, 2) == m.pi(x, 2)


def test_divisor_idx():
    m = factor(72)
    assert m.divisor_idx(12).exponents == (2, 1)
    assert sorted(m.divisors()) == [d for d in range(1, 73) if 72 % d == 0]
    with pytest.raises(ValueError):
        m.divisor_idx(5)
