"""Complement enumeration, corpus generation, bounded tiles-Z decision, conjecture harnesses."""
from __future__ import annotations

import json
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from math import gcd

from . import cyclotomic as cy
from .multiset import Multiset, from_set
from .tiling import TilingPair, divisor_set, make_pair, standard_set, verify
from .zmod import as_modulus, factor

DEFAULT_MODULI = (12, 16, 18, 24, 36, 40, 48, 60, 72, 90, 108, 120, 144)
STRETCH_MODULI = (180, 216)
CORPUS_CAP = 400


class BudgetExceeded(RuntimeError):
    pass


def _threads(threads=None) -> int:
    if threads is None:
        threads = int(os.environ.get("TILEKIT_THREADS", "1") or 1)
    return max(1, int(threads))


# ---------------------------------------------------------------------------
# canonical forms


def canonical(elements, M: int) -> tuple[int, ...]:
    """Lexicographically least sorted list among the translates A - a, a in A."""
    els = [e % M for e in elements]
    best = None
    for a in els:
        cand = tuple(sorted((e - a) % M for e in els))
        if best is None or cand < best:
            best = cand
    return best


# ---------------------------------------------------------------------------
# exact cover by translates, pruned by divisor exclusion


class _Cover:
    def __init__(self, A, M: int, prune: bool = True):
        self.M = M
        self.A = sorted(set(int(a) % M for a in A))
        self.full = (1 << M) - 1
        amask = 0
        for a in self.A:
            amask |= 1 << a
        self.tmask = [((amask << b) | (amask >> (M - b))) & self.full for b in range(M)]
        bad = set()
        if prune:
            bad = set(divisor_set(from_set(self.A, M)).values) - {M}
        # compat[b] = bits b' with (b - b', M) not a divisor of A (other than M)
        good_diff = 0
        for d in range(M):
            if (gcd(d, M) or M) not in bad:
                good_diff |= 1 << d
        self.compat = [((good_diff << b) | (good_diff >> (M - b))) & self.full for b in range(M)]

    def solve(self, first: int = 0, limit=None, budget=None, rng=None, count_only=False):
        """Complements B with ``first`` in B.  Returns (list or count, nodes)."""
        out = []
        count = 0
        nodes = 0
        A, M, tmask, compat, full = self.A, self.M, self.tmask, self.compat, self.full

        def rec(covered, allowed, chosen):
            nonlocal count, nodes
            nodes += 1
            if budget is not None and nodes > budget:
                raise BudgetExceeded(f"search exceeded {budget} nodes")
            if covered == full:
                count += 1
                if not count_only:
                    out.append(tuple(sorted(chosen)))
                return limit is not None and count >= limit
            low = covered ^ (covered + 1)
            x = low.bit_length() - 1
            cands = [(x - a) % M for a in A]
            if rng is not None:
                rng.shuffle(cands)
            for b in cands:
                if (allowed >> b) & 1 and not (covered & tmask[b]):
                    chosen.append(b)
                    stop = rec(covered | tmask[b], allowed & compat[b], chosen)
                    chosen.pop()
                    if stop:
                        return True
            return False

        rec(self.tmask[first], self.compat[first] & ~(1 << first), [first])
        return (count if count_only else out), nodes


def enumerate_complements(A, M=None, budget: int | None = 10**7, limit=None, seed=None) -> list[Multiset]:
    """All B with 0 in B and A + B = Z_M, found by exact cover pruned with divisor exclusion."""
    if isinstance(A, Multiset):
        M, els = A.M, A.support
        if not A.is_set():
            raise ValueError("A must be a set")
    else:
        els = list(A)
    M = as_modulus(M).value
    if not els or M % len(set(e % M for e in els)):
        raise ValueError("|A| must divide M")
    rng = random.Random(seed) if seed is not None else None
    sols, _ = _Cover(els, M).solve(limit=limit, budget=budget, rng=rng)
    return [from_set(b, M) for b in sorted(sols)]


def count_complements(A, M: int, prune: bool = True, budget=None) -> int:
    return _Cover(A, M, prune).solve(count_only=True, budget=budget)[0]


def count_exclusion_sets(A, M: int, size: int, budget=None) -> int:
    """Sets B (0 in B, |B| = size) with Div(A) cap Div(B) = {M}, by clique search."""
    bad = set(divisor_set(from_set(sorted(set(a % M for a in A)), M)).values) - {M}
    return _count_cliques(M, frozenset(bad), size, budget)


def _count_cliques(M: int, bad: frozenset, size: int, budget=None) -> int:
    ok_diff = [(gcd(d, M) or M) not in bad for d in range(M)]
    # neighbours only above the current vertex: count each clique once
    nbr = []
    for b in range(M):
        m = 0
        for c in range(b + 1, M):
            if ok_diff[c - b]:
                m |= 1 << c
        nbr.append(m)
    count = 0
    nodes = 0

    def rec(cand, k):
        nonlocal count, nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded("clique search budget exceeded")
        if k == size:
            count += 1
            return
        if bin(cand).count("1") < size - k:
            return
        while cand:
            low = cand & -cand
            b = low.bit_length() - 1
            cand ^= low
            rec(cand & nbr[b], k + 1)

    rec(nbr[0], 1)
    return count


@dataclass
class SandsCensus:
    M: int
    sets: int = 0  # candidate A checked (0 in A, |A| <= |B|)
    tilings: int = 0
    mismatches: list = field(default_factory=list)
    tiles: set = field(default_factory=set)  # canonical tiles found (either side)


def sands_census(M: int, collect_tiles: bool = False) -> SandsCensus:
    """Exhaustive comparison of exact-cover tilings with divisor-exclusion pairs in Z_M.

    For every A with 0 in A and |A| <= M/|A| the number of B (0 in B) with
    A + B = Z_M, found by plain exact cover, must equal the number of B of
    the complementary size with Div(A) cap Div(B) = {M}, found by clique
    search.  Divisor exclusion always forces the translates A + b to be
    disjoint, so equal counts mean equal solution sets.  Pairs with
    |A| > |B| are the same pairs read the other way round.
    """
    from itertools import combinations

    out = SandsCensus(M)
    cache: dict = {}
    for k in [d for d in range(1, M + 1) if M % d == 0 and d * d <= M]:
        for rest in combinations(range(1, M), k - 1):
            A = (0,) + rest
            out.sets += 1
            n_cover = count_complements(A, M, prune=False)
            bad = frozenset(set(divisor_set(from_set(A, M)).values) - {M})
            key = (bad, M // k)
            if key not in cache:
                cache[key] = _count_cliques(M, bad, M // k)
            if cache[key] != n_cover:
                out.mismatches.append((A, n_cover, cache[key]))
            out.tilings += n_cover
            if collect_tiles and n_cover:
                out.tiles.add(canonical(A, M))
                for B in _Cover(A, M).solve()[0]:
                    out.tiles.add(canonical(B, M))
    return out


def brute_complements(A, M: int) -> list[tuple[int, ...]]:
    """Naive oracle: every subset B with 0 in B, |B| = M/|A|, checked by direct cover."""
    from itertools import combinations

    A = sorted(set(a % M for a in A))
    k = M // len(A)
    out = []
    for rest in combinations(range(1, M), k - 1):
        B = (0,) + rest
        hit = [0] * M
        ok = True
        for a in A:
            for b in B:
                x = (a + b) % M
                if hit[x]:
                    ok = False
                    break
                hit[x] = 1
            if not ok:
                break
        if ok:
            out.append(B)
    return out


# ---------------------------------------------------------------------------
# corpus


@dataclass
class Corpus:
    moduli: tuple[int, ...]
    pairs: dict = field(default_factory=dict)  # M -> list[TilingPair]
    meta: dict = field(default_factory=dict)  # M -> generation info

    def all_pairs(self):
        for M in self.moduli:
            yield from self.pairs.get(M, [])

    def __len__(self):
        return sum(len(v) for v in self.pairs.values())

    def dump(self, path):
        with open(path, "w") as fh:
            for M in self.moduli:
                fh.write(json.dumps({"kind": "meta", "modulus": M, **self.meta.get(M, {})}, sort_keys=True) + "\n")
                for p in self.pairs.get(M, []):
                    fh.write(json.dumps({"kind": "pair", **p.to_json()}, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path, reverify: bool = True) -> "Corpus":
        pairs: dict = {}
        meta: dict = {}
        order = []
        with open(path) as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                M = int(rec["modulus"])
                if M not in order:
                    order.append(M)
                if rec.get("kind") == "meta":
                    meta[M] = {k: v for k, v in rec.items() if k not in ("kind", "modulus")}
                    continue
                if reverify:
                    pr = make_pair(rec["a"], rec["b"], M)
                else:
                    pr = _trusted_pair(rec["a"], rec["b"], M)
                pairs.setdefault(M, []).append(pr)
        return cls(tuple(order), pairs, meta)


def _trusted_pair(a, b, M) -> TilingPair:
    from .tiling import Criteria

    m = as_modulus(M)
    return TilingPair(from_set(a, m), from_set(b, m), m, Criteria(True, True, True))


def flat_profiles(M) -> list[tuple[tuple[int, ...], ...]]:
    m = as_modulus(M)
    per = []
    for p, n in m.primes:
        opts = []
        for mask in range(1 << n):
            opts.append(tuple(a for a in range(1, n + 1) if mask >> (a - 1) & 1))
        per.append(opts)
    return list(product(*per))


def _modulus_corpus(M: int, tiles_per_seed, comps_per_tile, budget, seed) -> tuple[list, dict]:
    m = factor(M)
    rng = random.Random(f"{seed}:{M}")
    complete = True
    tiles: dict[tuple, None] = {}
    for prof in flat_profiles(m):
        flat = standard_set(m, prof)
        cover = _Cover(flat.support, M)
        try:
            sols, _ = cover.solve(limit=tiles_per_seed, budget=budget, rng=None if tiles_per_seed is None else rng)
        except BudgetExceeded:
            complete = False
            sols, _ = cover.solve(limit=tiles_per_seed or 64, rng=rng)
        if tiles_per_seed is not None and len(sols) >= tiles_per_seed:
            complete = False
        for s in sols:
            tiles[canonical(s, M)] = None
    seen = set()
    pairs = []
    for A in sorted(tiles):
        cover = _Cover(A, M)
        try:
            sols, _ = cover.solve(limit=comps_per_tile, budget=budget, rng=None if comps_per_tile is None else rng)
        except BudgetExceeded:
            complete = False
            sols, _ = cover.solve(limit=comps_per_tile or 16, rng=rng)
        if comps_per_tile is not None and len(sols) >= comps_per_tile:
            complete = False
        for B in sols:
            key = (A, canonical(B, M))
            if key in seen:
                continue
            seen.add(key)
            pairs.append(key)
    pairs.sort()
    out = [make_pair(list(a), list(b), M) for a, b in pairs]
    return out, {"tiles": len(tiles), "pairs": len(out), "complete": complete}


def build_corpus(
    moduli=DEFAULT_MODULI,
    tiles_per_seed: int | None = 6,
    comps_per_tile: int | None = 2,
    budget: int | None = 2 * 10**5,
    seed: int = 0,
    threads=None,
    cap: int = CORPUS_CAP,
    complete_upto: int = 24,
) -> Corpus:
    """Tilings of Z_M for each M, seeded from standard sets.

    For the moduli in scope every tiling satisfies T2 (at most two primes
    appear with exponent >= 2), so every tile is a complement of a standard
    set; tiles are collected that way and then paired with their own
    complements.  Moduli up to ``complete_upto`` are enumerated in full;
    larger ones keep a seeded sample of at most ``tiles_per_seed`` tiles per
    standard set and ``comps_per_tile`` complements per tile.
    """
    moduli = tuple(int(M) for M in moduli)
    for M in moduli:
        if M > cap:
            raise ValueError(f"modulus {M} above corpus cap {cap}")
    args = [
        (M, None, None, None, seed) if M <= complete_upto else (M, tiles_per_seed, comps_per_tile, budget, seed)
        for M in moduli
    ]
    n = _threads(threads)
    if n > 1 and len(moduli) > 1:
        with ProcessPoolExecutor(n) as ex:
            results = list(ex.map(_modulus_corpus_star, args))
    else:
        results = [_modulus_corpus(*a) for a in args]
    corpus = Corpus(moduli)
    for M, (prs, meta) in zip(moduli, results):
        corpus.pairs[M] = prs
        corpus.meta[M] = meta
    return corpus


def _modulus_corpus_star(a):
    return _modulus_corpus(*a)


# ---------------------------------------------------------------------------
# tiles of Z


@dataclass
class TilesZVerdict:
    verdict: str  # TILES / TILES-BY-T1T2 / NOT-A-TILE / NOT-TILES-WITHIN-BOUND
    modulus: int | None = None
    complement: list | None = None
    detail: str = ""


def _prime_powers_upto(deg: int) -> list[int]:
    """Prime powers s with phi(s) <= deg (the only ones Phi_s can divide a degree-deg polynomial)."""
    out = []
    for p in range(2, deg + 2):
        if len(factor(p).primes) == 1 and factor(p).primes[0][1] == 1:
            q = p
            while q // p * (p - 1) <= deg:
                out.append(q)
                q *= p
    return out


def z_conditions(A) -> tuple[bool, bool, frozenset]:
    """(T1, T2, S_A) for A as a polynomial in Z[X] (not reduced mod anything)."""
    A = sorted(set(A))
    deg = A[-1] - A[0]
    sa = frozenset(s for s in _prime_powers_upto(deg) if cy.divides(s, Multiset.from_elements(s, A)))
    size = 1
    for s in sa:
        size *= factor(s).primes[0][0]
    t1 = size == len(A)
    t2 = all(cy.divides(s, Multiset.from_elements(s, A)) for s in cy.t2_selections(sa))
    return t1, t2, sa


def tiles_z_bounded(A, periods=None, max_period: int = 256, find_complement: bool = True) -> TilesZVerdict:
    """Decide whether a finite A subset of Z tiles Z, checking periods up to a bound."""
    A = sorted(set(int(a) for a in A))
    if not A:
        raise ValueError("empty set")
    if A[0] < 0:
        raise ValueError("elements must be nonnegative")
    A = [a - A[0] for a in A]
    n = len(A)
    span = A[-1] + 1
    if periods is None:
        # a tile of size n tiles some Z_M with the same prime factors as n
        ps = [p for p, _ in factor(n).primes] if n > 1 else []
        periods = _smooth_multiples(n, ps, span, max_period)
    else:
        periods = [int(M) for M in periods]
    if n == 1:
        return TilesZVerdict("TILES", 1, [0])
    t1, t2, _ = z_conditions(A)
    if not t1:
        return TilesZVerdict("NOT-A-TILE", detail="T1 fails")
    if t2 and not find_complement:
        return TilesZVerdict("TILES-BY-T1T2")
    for M in periods:
        if M < span or M % n:
            continue
        if len(set(a % M for a in A)) != n:
            continue
        sols, _ = _Cover(A, M).solve(limit=1)
        if sols:
            return TilesZVerdict("TILES", M, list(sols[0]))
    if t2:
        return TilesZVerdict("TILES-BY-T1T2", detail="no complement found within bound")
    return TilesZVerdict("NOT-TILES-WITHIN-BOUND", detail=f"periods tried: {periods}")


def _smooth_multiples(n: int, primes, span: int, max_period: int) -> list[int]:
    out = []
    for M in range(n, max_period + 1, n):
        r = M
        for p in primes:
            while r % p == 0:
                r //= p
        if r == 1 and M >= span:
            out.append(M)
    return out


# ---------------------------------------------------------------------------
# conjecture harnesses


@dataclass
class HarnessReport:
    predicate: str
    checked: int = 0
    passed: int = 0
    skipped: int = 0
    violations: list = field(default_factory=list)
    tallies: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "predicate": self.predicate,
            "checked": self.checked,
            "passed": self.passed,
            "skipped": self.skipped,
            "violations": self.violations,
            "tallies": self.tallies,
            "ok": self.ok,
        }


class HarnessFailure(AssertionError):
    pass


def _oriented(pair):
    yield "A", pair
    yield "B", pair.swap()


def _pred_one_divisor(pair):
    """Phi_{p^n} | A  =>  M/p not in Div(B)."""
    m = pair.modulus
    dB = None
    out = []
    for i, (p, n) in enumerate(m.primes):
        if not cy.divides(p**n, pair.a):
            continue
        dB = divisor_set(pair.b).values if dB is None else dB
        ok = m.value // p not in dB
        out.append((ok, {"i": i, "divisor": m.value // p}))
    return out


def _pred_line_bound(pair):
    """p^alpha || |A| with alpha < n  =>  |A cap l_i(x)| < p^n for every x."""
    import numpy as np

    m = pair.modulus
    out = []
    for i, (p, n) in enumerate(m.primes):
        alpha = 0
        while pair.a.total % p ** (alpha + 1) == 0:
            alpha += 1
        if alpha >= n:
            continue
        Mi = m.cofactors[i]
        counts = np.bincount(np.asarray(pair.a.support) % Mi, minlength=Mi)
        worst = int(counts.argmax())
        out.append((int(counts[worst]) < p**n, {"i": i, "line_root": worst, "count": int(counts[worst])}))
    return out


def _slab_tiles(A, B, i) -> bool:
    from .reductions import slab_data

    N = A.M // A.modulus.primes[i][0]
    Bn = B.reduce_mod(N)
    if not Bn.is_set():
        return False
    for T in slab_data(A, i).translates.values():
        if not T.is_set() or T.total * Bn.total != N or not verify(T, Bn).tiles:
            return False
    return True


def _pred_slab_strong(pair):
    out = []
    for i, (p, n) in enumerate(pair.modulus.primes):
        if cy.divides(p**n, pair.a):
            out.append((_slab_tiles(pair.a, pair.b, i), {"i": i}))
    return out


def _pred_slab_weak(pair):
    for i in range(pair.modulus.K):
        if _slab_tiles(pair.a, pair.b, i) or _slab_tiles(pair.b, pair.a, i):
            return [(True, {"i": i})]
    return [(False, {})]


def _pred_fibering(pair):
    """For each i with n_i >= 2 some 1 <= alpha < n_i makes A or B M/p^alpha-fibered."""
    from .fibers import is_fibered

    m = pair.modulus
    out = []
    for i, (p, n) in enumerate(m.primes):
        if n < 2:
            continue
        hit = None
        for alpha in range(1, n):
            N = m.value // p**alpha
            if is_fibered(pair.a, i, N):
                hit = ("A", alpha)
            elif is_fibered(pair.b, i, N):
                hit = ("B", alpha)
            if hit:
                break
        out.append((hit is not None, {"i": i, "fibered": hit}))
    return out


def _pred_splitplanes(pair, tallies):
    """A_x lies in one of Pi(x, p^n), Pi(a, p^n) whenever (x - a, M) = M/p_i, x not in A."""
    import numpy as np

    m = pair.modulus
    M = m.value
    sup = np.asarray(pair.a.support)
    divB = np.zeros(M + 1, dtype=bool)
    divB[list(divisor_set(pair.b).values)] = True
    g = np.gcd((np.arange(M)[:, None] - sup[None, :]) % M, M)
    g[g == 0] = M
    inA = np.zeros(M, dtype=bool)
    inA[sup] = True
    out = []
    bsup = pair.b.support
    for x in np.flatnonzero(~inA):
        Ax = sup[divB[g[x]]]
        for i, (p, n) in enumerate(m.primes):
            q = p**n
            for a in sup[g[x] == M // p]:
                in_x = (Ax - x) % q == 0
                in_a = (Ax - a) % q == 0
                if in_x.all():
                    side = "x"
                elif in_a.all():
                    side = "a"
                else:
                    out.append((False, {"x": int(x), "a": int(a), "i": i, "A_x": Ax.tolist()}))
                    continue
                # delta_m pattern: per b, which plane carries A_{x,b}
                pats = set()
                for b in bsup:
                    dy = {gcd(b - bb, M) or M for bb in bsup}
                    Axb = [int(v) for v in Ax if (gcd(int(x) - int(v), M) or M) in dy]
                    if Axb:
                        pats.add("x" if all((v - x) % q == 0 for v in Axb) else "a")
                key = f"{side}:{''.join(sorted(pats))}"
                tallies[key] = tallies.get(key, 0) + 1
                out.append((True, {}))
    return out


PREDICATES = {
    "10.4": _pred_one_divisor,
    "one-divisor": _pred_one_divisor,
    "10.8": _pred_line_bound,
    "line-bound": _pred_line_bound,
    "q10.1-strong": _pred_slab_strong,
    "q10.1-weak": _pred_slab_weak,
    "10.6": _pred_fibering,
    "fibering": _pred_fibering,
    "10.7": _pred_splitplanes,
    "splitplanes": _pred_splitplanes,
}
_SYMMETRIC = {_pred_slab_weak}


def conjecture_harness(corpus, predicate: str, ci: bool = False, max_witnesses: int = 50) -> HarnessReport:
    """Run one predicate over every pair (both orientations where it matters).

    Violations are collected as witnesses; with ``ci`` set they raise at the end.
    """
    if predicate not in PREDICATES:
        raise KeyError(f"unknown predicate {predicate!r}; choose from {sorted(PREDICATES)}")
    fn = PREDICATES[predicate]
    rep = HarnessReport(predicate)
    pairs = corpus.all_pairs() if isinstance(corpus, Corpus) else corpus
    for pair in pairs:
        views = [("A", pair)] if fn in _SYMMETRIC else _oriented(pair)
        for side, q in views:
            res = fn(q, rep.tallies) if fn is _pred_splitplanes else fn(q)
            if not res:
                rep.skipped += 1
            for ok, wit in res:
                rep.checked += 1
                if ok:
                    rep.passed += 1
                elif len(rep.violations) < max_witnesses:
                    rep.violations.append({"pair": pair.to_json(), "side": side, **wit})
    if ci and rep.violations:
        raise HarnessFailure(json.dumps(rep.violations[:3]))
    return rep
