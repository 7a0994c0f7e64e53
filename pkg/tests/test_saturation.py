import pytest

from tilekit import cyclotomic as cy
from tilekit import saturation as sat
from tilekit.multiset import from_set
from tilekit.tiling import make_pair, standard_set
from tilekit.zmod import factor


@pytest.fixture
def m18():
    return make_pair([0, 5, 6, 11, 12, 17], [0, 2, 4], 18)


def test_saturating_set_example(m18):
    s = sat.saturating_set(m18, 1)
    assert s.union == (5, 11, 17)
    assert all(v == (5, 11, 17) for v in s.per_b.values())
    # elements of A reduce to themselves
    assert sat.saturating_set(m18, 0).union == (0,)


def test_saturating_sets_small_corpus(corpus):
    for pair in corpus.pairs[24][:200]:
        for q in (pair, pair.swap()):
            for x in range(q.M):
                s = sat.saturating_set(q, x)  # raises on any definitional mismatch
                assert sat.bispan_bound_check(q, x)
                if x in q.a:
                    assert s.union == (x,)


def test_restricted_box_sums():
    A = from_set([0, 1, 4, 5], 12)
    full = sat.restricted_nbox(A, 2, range(12))
    half = sat.restricted_nbox(A, 2, [0, 1])
    rest = sat.restricted_nbox(A, 2, [4, 5])
    assert [a + b for a, b in zip(half.entries, rest.entries)] == list(full.entries)


def test_span_geometry():
    m = factor(36)
    x, xp = 0, 18  # (x - x', 36) = 18: exponents (1, 2)
    S = sat.span(m, x, xp)
    assert S == frozenset(range(0, 36, 4))  # only the 2-coordinate has alpha < n
    assert sat.bispan(m, x, xp) == S | frozenset(range(18 % 4, 36, 4))
    with pytest.raises(ValueError):
        sat.span(m, 3, 3)


def test_span_depends_only_on_gcd():
    m = factor(72)
    for d in (6, 12, 18, 24, 36):
        base = sat.span(m, 0, d)
        for u in (5, 7, 11):
            assert sat.span(m, 0, d * u % 72) == base


def test_setplusspan(corpus):
    for pair in corpus.pairs[36][:40]:
        for x in range(0, 36, 5):
            for xp in range(1, 36, 7):
                for y in pair.b.support[:2]:
                    assert sat.setplusspan_check(pair, x, xp, y)


def test_enhanced_exclusion_hypothesis():
    m = factor(36)
    assert not sat.exclusion_hypothesis(m, 36, 36)
    assert sat.exclusion_hypothesis(m, 18, 12)  # exponents (1,2) vs (2,1)
    assert not sat.exclusion_hypothesis(m, 18, 6)  # both share exponent 1 at p = 2
    pair = make_pair([0, 1, 2, 3], [0, 4, 8], 12)
    with pytest.raises(ValueError):
        sat.enhanced_exclusion_check(pair, 0, 0, 12, 12)
    assert sat.enhanced_exclusion_check(pair, 0, 0, 6, 4)


def test_exclusion_scan_matches_direct(corpus):
    for pair in corpus.pairs[36][:30]:
        m = pair.modulus
        assert sat.exclusion_scan(pair) == []
        divs = m.divisors()
        for x in range(0, 36, 7):
            for y in range(0, 36, 5):
                for d1 in divs:
                    for d2 in divs:
                        if d1 < d2 and sat.exclusion_hypothesis(m, d1, d2):
                            assert sat.enhanced_exclusion_check(pair, x, y, d1, d2)


def test_missing_joint_counterexample():
    # 6Z_36 contains full M-fibers in both directions; drop the joint 0
    m = factor(36)
    A = standard_set(m, [(2,), (2,)])
    assert list(A.support) == list(range(0, 36, 6))
    pair = make_pair(A, from_set(range(6), 36))
    assert sat.joint_hypothesis(pair)
    assert sat.missing_joint_scan(pair) == []
    broken = from_set(list(range(6, 36, 6)), 36)
    assert 0 in sat.joints_in(broken)


def test_missing_joint_single_prime():
    pair = make_pair([0, 1, 2, 3], [0, 4], 8)
    # D(M) = M/p here, so the hypothesis asks only that M/p not be in Div(B)
    assert sat.joint_hypothesis(pair) is False
    assert sat.missing_joint_scan(pair) is None
    pair = make_pair([0, 4], [0, 1, 2, 3], 8)
    assert sat.joint_hypothesis(pair)
    assert sat.missing_joint_scan(pair) == []


def test_two_directions(szabo):
    m = szabo.modulus
    D = m.top_grid(m.value)
    seen = 0
    for x0 in range(D):
        r = sat.two_directions_check(szabo, x0)
        assert r.ok
        seen += r.applicable
    assert seen > 0
    # a single fiber is trivially fine
    single = from_set(m.fiber(0, 0), m)
    r = sat.two_directions_check(single, 0)
    assert r.applicable and r.ok and r.max_values == 1


def test_three_direction_configuration_is_not_a_tile():
    m = factor(900)
    pts = set()
    for i, c in enumerate([(0, 0, 0), (0, 0, 5), (2, 3, 0)]):
        pts |= set(m.fiber(m.from_coords(c), i))
    A = from_set(sorted(pts), m)
    r = sat.two_directions_check(A, 0)
    assert r.applicable and not r.ok and r.witness == {"directions": [0, 1, 2]}
    assert not cy.t1_check(A)


def test_one_dim_structure(corpus):
    found = 0
    for M in (36, 72, 108):
        for pair in corpus.pairs[M][:60]:
            for q in (pair, pair.swap()):
                m = q.modulus
                for i, (p, n) in enumerate(m.primes):
                    for g in range(1, n + 1):
                        for x in range(q.M):
                            if x in q.a:
                                continue
                            y = q.b.support[0]
                            if sat.one_dim_hypothesis(q, x, y, i, g):
                                r = sat.one_dim_structure(q, x, y, i, g)
                                assert r.ok, r.reason
                                found += 1
                                break
    assert found > 50


def test_onedivisor(corpus):
    for pair in corpus.pairs[72][:40]:
        for q in (pair, pair.swap()):
            for x in range(0, 72, 5):
                for y in q.b.support[:3]:
                    for i in range(q.modulus.K):
                        assert sat.onedivisor_check(q, x, y, i)
