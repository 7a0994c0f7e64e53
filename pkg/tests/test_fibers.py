import pytest

from tilekit import cyclotomic as cy
from tilekit import fibers as fb
from tilekit.multiset import from_set
from tilekit.tiling import make_pair, standard_set
from tilekit.zmod import factor


@pytest.mark.parametrize("N,p,delta", [(12, 2, 1), (12, 2, 2), (36, 3, 2), (72, 2, 3), (72, 3, 1), (900, 5, 2)])
def test_standard_fiber_divisors(N, p, delta):
    F = fb.standard_fiber(N, p, delta)
    expect = fb.fiber_divisors(N, p, delta)
    got = [s for s in factor(N).divisors() if s != 1 and cy.divides(s, F)]
    assert sorted(got) == expect
    assert F.total == p


def test_detect_fibered():
    m = factor(36)
    A = from_set(m.fiber(0, 0), m) + from_set(m.fiber(1, 0), m)
    dec = fb.detect_fibered(A, 0)
    assert dec is not None and dec.multiplicity == 1 and len(dec.roots) == 2
    assert fb.detect_fibered(from_set([0, 1], 36), 0) is None
    # fibered on a lower scale: {0, 6} is 12-fibered in the 2-direction
    assert fb.is_fibered(from_set([0, 6], 36), 0, 12)
    assert not fb.is_fibered(from_set([0, 6], 36), 0, 36)


def test_chain_definition_and_properties():
    m = factor(72)  # 2^3 * 3^2
    # {1,3}-chain in the 2-direction: levels 1 and 3 carry fibers
    ch = fb.chains_at(from_set(range(72), m), 0, {1, 3}, 0, limit=5)
    assert ch
    for F in ch:
        assert fb.is_chain(F.elements, m, 0, {1, 3})
        assert len(F.elements) == 4
        props = fb.chain_properties_check(F)
        assert props["ok"], props
    assert not fb.is_chain((0, 1), m, 0, {1})


def test_pset_fibered_partition():
    m = factor(36)
    B = standard_set(m, [(1,), (1,)])
    chains = fb.detect_pset_fibered(B, 1, {2})
    assert chains is not None
    assert sorted(x for c in chains for x in c.elements) == list(B.support)


def test_szabo_properties(szabo):
    pair = szabo
    assert pair.M == 11025
    assert pair.a.total == pair.b.total == 105
    for p in (3, 5, 7):
        for X in (pair.a, pair.b):
            assert any(x % p for x in X.support)
    assert cy.t2_check(pair.a) and cy.t2_check(pair.b)
    for i in range(3):
        got = fb.all_cofibered(pair, i, 2, cofiber_limit=4)
        assert any(s.pa == {1} and s.pb == {2} for s in got)


def test_szabo_shift_roundtrip(szabo):
    pair = szabo
    st = fb.find_cofibered(pair, 0, 2)
    F = st.cofibers[0]
    res = fb.fiber_shift(pair, st, F, 2, 1)
    assert res.tiles and res.t2_preserved
    delta = pair.M // 9
    back = fb.shift_set(res.pair.a, from_set(res.shifted, pair.M), -delta)
    assert back == pair.a


def test_shift_rejections():
    pair = make_pair([0, 5, 6, 11, 12, 17], [0, 2, 4], 18)
    st = fb.find_cofibered(pair, 1, 2)
    assert st is not None and st.pa == {1} and st.pb == {2}
    with pytest.raises(fb.ShiftRejected):
        fb.fiber_shift(pair, st, st.cofibers[0], 1)
    with pytest.raises(fb.ShiftRejected):
        fb.fiber_shift(pair, st, st.cofibers[0], 2, k=3)
    with pytest.raises(fb.ShiftRejected):
        fb.shift_set(pair.a, from_set([1], 18), 2)


def test_szabo_input_validation():
    with pytest.raises(ValueError):
        fb.szabo_construct(3, 3, 5)
    with pytest.raises(ValueError):
        fb.szabo_construct(2, 3, 5)
