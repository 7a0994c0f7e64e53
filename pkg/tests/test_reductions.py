import pytest

from tilekit import cyclotomic as cy
from tilekit import reductions as red
from tilekit.fibers import is_fibered
from tilekit.multiset import from_set
from tilekit.tiling import make_pair
from tilekit.zmod import factor


def test_subgroup_trivial():
    r = red.subgroup_reduce(make_pair([0, 2], [0, 1], 4), 0)
    assert list(r.a_reduced.support) == [0, 1]
    assert {k: list(v.support) for k, v in r.b_classes.items()} == {0: [0], 1: [0]}
    assert r.tau_ok


def test_subgroup_requires_containment():
    with pytest.raises(red.NotApplicable):
        red.subgroup_reduce(make_pair([0, 1], [0, 2], 4), 0)


def test_tau_is_injective_on_divisors():
    for M, p in ((72, 2), (72, 3), (900, 5)):
        N = M // p
        imgs = [red.tau(s, p) for s in factor(N).divisors()]
        assert len(set(imgs)) == len(imgs)
        assert all(M % t == 0 for t in imgs)
        # the image misses exactly the divisors with p-exponent 1
        i = [q for q, _ in factor(M).primes].index(p)
        missing = set(factor(M).divisors()) - set(imgs)
        assert all(factor(M).exponent(d, i) == 1 for d in missing)


def test_tijdeman_scaled_subgroup(corpus):
    seen = 0
    for pair in corpus.pairs[72][:80]:
        m = pair.modulus
        for i, (p, _) in enumerate(m.primes):
            if pair.a.total % p == 0:
                continue
            scaled = make_pair(pair.a.dilate(p), pair.b)
            r = red.subgroup_reduce(scaled, i)
            assert r.tau_ok
            # A~(X) = A(X^p), so A' is A read mod M/p
            assert r.a_reduced == pair.a.reduce_mod(m.value // p)
            seen += 1
    assert seen


def test_slab_szabo_all_directions(szabo):
    for i in range(3):
        c = red.slab_conditions(szabo, i)
        assert c.cond_i and c.cond_ii and c.cond_iii
        r = red.slab_reduce(szabo, i)
        assert r.pair.M == szabo.M // szabo.modulus.primes[i][0]
        assert r.t2_reduced and r.t2_original


def test_slab_data_sizes(szabo):
    d = red.slab_data(szabo.a, 0)
    assert d.uniform
    assert {T.total for T in d.translates.values()} == {35}
    assert sum(L.total for L in d.layers) == 105
    # the periodic extension is fibered in the chosen direction
    assert is_fibered(d.extension, 0)


def test_fibered_tile_satisfies_slab():
    m = factor(36)
    A = from_set(sorted(set(m.fiber(0, 0)) | set(m.fiber(1, 0))), m)
    # complement found by search
    from tilekit.search import enumerate_complements

    B = enumerate_complements(A, limit=1)[0]
    pair = make_pair(A, B)
    c = red.slab_conditions(pair, 0)
    assert c.all


def test_synthetic_slab_failure():
    A = from_set([0, 2], 12)
    B = from_set([0, 1, 2, 3, 4, 6], 12)
    assert cy.divides(4, A)
    c = red.slab_conditions((A, B), 0)
    assert not c.cond_i and not c.cond_ii and not c.cond_iii


def test_slab_not_applicable():
    pair = make_pair([0, 1], [0, 2, 4, 6, 8, 10], 12)
    with pytest.raises(red.NotApplicable):
        red.slab_conditions(pair, 0)


def test_three_way_agreement_on_corpus(corpus):
    n = 0
    for M in (36, 72, 108, 144):
        for pair in corpus.pairs[M][:60]:
            for q in (pair, pair.swap()):
                for i in range(q.modulus.K):
                    if red.slab_applicable(q, i):
                        assert red.slab_conditions(q, i).agree
                        n += 1
    assert n > 100


def test_driver_szabo(szabo):
    tr = red.t2_induction_driver(szabo)
    assert tr.root.step == "slab"
    assert tr.verdict is True and tr.direct_t2 and tr.consistent
    assert all(c.step == "base" for c in tr.root.children)


def test_driver_trivial_and_forced():
    tr = red.t2_induction_driver(make_pair([0], list(range(6)), 6))
    assert tr.root.step == "base"
    pair = make_pair([0, 1, 2, 3], [0, 4, 8], 12)
    tr = red.t2_induction_driver(pair, "subgroup:0")
    assert tr.root.step == "subgroup" and tr.root.side == "B" and tr.consistent
    tr = red.t2_induction_driver(pair, "slab:1")
    assert tr.stuck or tr.consistent


def test_driver_corpus(corpus):
    for M in (12, 72, 144):
        for pair in corpus.pairs[M][:50]:
            tr = red.t2_induction_driver(pair)
            assert not tr.stuck and tr.consistent
