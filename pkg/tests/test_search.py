import json
import random

import pytest

from tilekit import search as se
from tilekit.multiset import from_set
from tilekit.tiling import make_pair


def _sets(bs):
    return [list(b.support) for b in bs]


def test_complements_examples():
    assert _sets(se.enumerate_complements([0, 1, 2, 3], 12)) == [[0, 4, 8]]
    assert _sets(se.enumerate_complements([0, 2], 4)) == [[0, 1], [0, 3]]
    assert _sets(se.enumerate_complements(list(range(6)), 6)) == [[0]]
    assert se.enumerate_complements([0, 1, 3], 6) == []


def test_complements_bad_size():
    with pytest.raises(ValueError):
        se.enumerate_complements([0, 1, 3, 4, 5], 12)


def test_complements_budget():
    with pytest.raises(se.BudgetExceeded):
        se.enumerate_complements([0, 1], 144, budget=10)


@pytest.mark.parametrize("M", [4, 6, 8, 9, 10, 12, 16, 18, 20, 24])
def test_complements_vs_brute(M):
    rng = random.Random(M)
    divs = [d for d in range(2, M) if M % d == 0]
    for _ in range(12):
        k = rng.choice(divs)
        if M // k > 8:
            continue
        A = [0] + rng.sample(range(1, M), k - 1)
        fast = sorted(tuple(b.support) for b in se.enumerate_complements(A, M))
        assert fast == sorted(se.brute_complements(A, M))


def test_canonical():
    assert se.canonical([5, 6, 7], 12) == (0, 1, 2)
    assert se.canonical([0, 11], 12) == (0, 1)
    assert se.canonical([0, 4, 8], 12) == (0, 4, 8)


def test_trivial_modulus():
    c = se.build_corpus((2,))
    assert c.meta[2] == {"tiles": 2, "pairs": 2, "complete": True}
    s = se.sands_census(2)
    assert not s.mismatches and s.sets == 1 and s.tilings == 1


def test_golden_small_moduli():
    c = se.build_corpus((12, 18, 20))
    assert c.meta[12]["complete"] and c.meta[12]["tiles"] == 29 and c.meta[12]["pairs"] == 52
    for M in (12, 18, 20):
        census = se.sands_census(M, collect_tiles=True)
        assert not census.mismatches
        tiles = {p.a.support for p in c.pairs[M]} | {se.canonical(p.b.support, M) for p in c.pairs[M]}
        assert tiles == census.tiles
        assert c.meta[M]["tiles"] == len(census.tiles)


def test_corpus_pairs_tile(corpus):
    assert len(corpus) > 3000
    for p in corpus.all_pairs():
        assert p.verified.direct
        assert p.a.support[0] == 0 and p.b.support[0] == 0


def test_corpus_deterministic_and_roundtrip(tmp_path):
    c1 = se.build_corpus((36, 72))
    c2 = se.build_corpus((36, 72))
    f1, f2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    c1.dump(f1)
    c2.dump(f2)
    assert f1.read_text() == f2.read_text()
    back = se.Corpus.load(f1)
    assert back.moduli == c1.moduli and back.meta == c1.meta
    assert [(p.a, p.b) for p in back.all_pairs()] == [(p.a, p.b) for p in c1.all_pairs()]


def test_corpus_load_rejects_nontiling(tmp_path):
    f = tmp_path / "bad.jsonl"
    f.write_text(json.dumps({"kind": "pair", "modulus": 12, "a": [0, 1], "b": [0, 1, 2, 3, 4, 5]}) + "\n")
    with pytest.raises(Exception):
        se.Corpus.load(f)


def test_corpus_cap():
    with pytest.raises(ValueError):
        se.build_corpus((500,))


def test_flat_profiles():
    assert len(se.flat_profiles(72)) == 8 * 4
    assert se.flat_profiles(6) == [((), ()), ((), (1,)), ((1,), ()), ((1,), (1,))]


def test_tiles_z():
    v = se.tiles_z_bounded([0, 1, 4, 5])
    assert v.verdict == "TILES" and v.modulus == 8
    assert sorted(v.complement) == [0, 2]
    assert se.tiles_z_bounded([0, 1, 3]).verdict == "NOT-A-TILE"
    assert se.tiles_z_bounded([7]).verdict == "TILES"
    assert se.tiles_z_bounded([0, 1, 4, 5], find_complement=False).verdict == "TILES-BY-T1T2"
    t1, t2, sa = se.z_conditions([0, 1, 4, 5])
    assert t1 and t2 and sa == {2, 8}


def test_tiles_z_bounded_limit():
    # tiles Z (complement {0,2} period 8) but no allowed period here
    v = se.tiles_z_bounded([0, 1, 4, 5], periods=[4])
    assert v.verdict == "TILES-BY-T1T2"


def test_harness_basic(corpus):
    r = se.conjecture_harness([], "10.4")
    assert r.checked == 0 and r.ok
    with pytest.raises(KeyError):
        se.conjecture_harness([], "nope")
    sub = corpus.pairs[36][:20]
    r = se.conjecture_harness(sub, "line-bound", ci=True)
    assert r.ok and r.checked == r.passed > len(sub)
    assert json.loads(json.dumps(r.to_json()))["predicate"] == "line-bound"


def test_harness_ci_raises():
    # the literal fibering statement fails on this tiling
    pair = make_pair([0, 1], [0, 2, 4, 6, 8, 10], 12)
    r = se.conjecture_harness([pair], "10.6")
    assert not r.ok and r.violations
    with pytest.raises(se.HarnessFailure):
        se.conjecture_harness([pair], "10.6", ci=True)


def test_splitplanes_tallies(corpus):
    r = se.conjecture_harness(corpus.pairs[72][:30], "10.7")
    assert r.ok
    assert sum(r.tallies.values()) == r.checked
