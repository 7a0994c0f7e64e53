"""Restricted boxes, saturating sets, Span/Bispan geometry and structural predicates."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .boxes import NBox, _phi_weights, _scale_divisors, box_matrix, box_product
from .fibers import detect_pset_fibered, is_chain
from .multiset import Multiset
from .tiling import TilingPair, divisor_set
from .zmod import Modulus, euler_phi

MAX_BRANCHES = 10**6


class SaturationMismatch(RuntimeError):
    """The two definitions of a saturating set disagree (a bug)."""


def _gcd(m: Modulus, d: int) -> int:
    d %= m.value
    from math import gcd

    return gcd(d, m.value) or m.value


# ---------------------------------------------------------------------------
# restricted boxes


def restricted_nbox(A: Multiset, x: int, X, N: int | None = None) -> NBox:
    """A^N[x | X]: only a in A cap X contribute."""
    N = A.M if N is None else int(N)
    divs = _scale_divisors(N)
    ent = dict.fromkeys(divs, 0)
    Xs = set(int(v) % A.M for v in X)
    for a in A.support:
        if a in Xs:
            from math import gcd

            m = gcd((x - a) % N, N) or N
            ent[m] += int(A.weights[a])
    return NBox(N, tuple(ent[d] for d in divs))


# ---------------------------------------------------------------------------
# saturating sets


@dataclass
class SaturatingSet:
    x: int
    per_b: dict  # b -> tuple A_{x,b}
    union: tuple  # A_x
    contributing: dict  # b -> tuple of m with A_m[x] B_m[b] > 0

    def to_json(self) -> dict:
        return {
            "x": self.x,
            "A_x": list(self.union),
            "per_b": {str(b): list(v) for b, v in self.per_b.items()},
            "contributing": {str(b): list(v) for b, v in self.contributing.items()},
        }


def saturating_pairs(A: Multiset, B: Multiset, x: int, y: int) -> tuple:
    """A_{x,y} = {a in A : (x - a, M) = (y - b, M) for some b in B}."""
    m = A.modulus
    dy = {_gcd(m, y - b) for b in B.support}
    return tuple(a for a in A.support if _gcd(m, x - a) in dy)


def saturating_set(pair: TilingPair, x: int, check: bool = True) -> SaturatingSet:
    A, B, m = pair.a, pair.b, pair.modulus
    x %= m.value
    divB = divisor_set(B).values
    ax = tuple(a for a in A.support if _gcd(m, x - a) in divB)
    per_b = {b: saturating_pairs(A, B, x, b) for b in B.support}
    union = tuple(sorted(set().union(*per_b.values()))) if per_b else ()
    if union != ax:
        raise SaturationMismatch(f"A_x from Div(B) {ax} != union of A_(x,b) {union}")
    boxA = box_matrix(A, m.value)[x]
    boxB = box_matrix(B, m.value)
    divs = _scale_divisors(m.value)
    contrib = {}
    for b in B.support:
        contrib[b] = tuple(d for j, d in enumerate(divs) if boxA[j] and boxB[b, j])
    sat = SaturatingSet(x, per_b, ax, contrib)
    if check:
        ok, why = minimality_check(pair, sat)
        if not ok:
            raise SaturationMismatch(why)
    return sat


def minimality_check(pair: TilingPair, sat: SaturatingSet) -> tuple[bool, str]:
    """Each A_{x,b} saturates <A[x|.], B[b]> = 1 and no single element can be dropped."""
    M = pair.M
    if not sat.union:
        return False, "empty saturating set"
    for b, S in sat.per_b.items():
        bb = NBox(M, tuple(int(v) for v in box_matrix(pair.b, M)[b]))
        full = box_product(restricted_nbox(pair.a, sat.x, S), bb)
        if full != 1:
            return False, f"restricted product at b={b} is {full}"
        for a in S:
            less = box_product(restricted_nbox(pair.a, sat.x, [s for s in S if s != a]), bb)
            if less == 1:
                return False, f"dropping {a} keeps the product at b={b}"
    return True, ""


# ---------------------------------------------------------------------------
# Span / Bispan


def _exponents(m: Modulus, d: int):
    return m.divisor_idx(_gcd(m, d)).exponents


def span_mask(m: Modulus, x: int, xp: int) -> np.ndarray:
    if (x - xp) % m.value == 0:
        raise ValueError("Span needs x != x'")
    al = _exponents(m, x - xp)
    z = np.arange(m.value)
    mask = np.zeros(m.value, dtype=bool)
    for (p, n), a in zip(m.primes, al):
        if a < n:
            mask |= (z - x) % p ** (a + 1) == 0
    return mask


def span(m, x: int, xp: int) -> frozenset:
    from .zmod import as_modulus

    m = as_modulus(m)
    return frozenset(int(v) for v in np.flatnonzero(span_mask(m, x, xp)))


def bispan(m, x: int, xp: int) -> frozenset:
    from .zmod import as_modulus

    m = as_modulus(m)
    return frozenset(int(v) for v in np.flatnonzero(span_mask(m, x, xp) | span_mask(m, xp, x)))


def in_span(m: Modulus, z: int, x: int, xp: int) -> bool:
    al = _exponents(m, x - xp)
    return any(a < n and (z - x) % p ** (a + 1) == 0 for (p, n), a in zip(m.primes, al))


def bispan_bound_check(pair: TilingPair, x: int) -> bool:
    """A_x is contained in Bispan(x, a) for every a in A (a != x)."""
    m = pair.modulus
    x %= m.value
    ax = saturating_set(pair, x, check=False).union
    ok = np.ones(m.value, dtype=bool)
    for a in pair.a.support:
        if a == x:
            continue
        ok &= span_mask(m, x, a) | span_mask(m, a, x)
    return all(ok[a] for a in ax)


def setplusspan_check(pair: TilingPair, x: int, xp: int, y: int) -> bool:
    """A_{x',y} is contained in A_{x,y} union Bispan(x, x')."""
    m = pair.modulus
    if (x - xp) % m.value == 0:
        return True
    lhs = set(saturating_pairs(pair.a, pair.b, xp, y))
    rhs = set(saturating_pairs(pair.a, pair.b, x, y)) | bispan(m, x, xp)
    return lhs <= rhs


# ---------------------------------------------------------------------------
# enhanced divisor exclusion


def exclusion_hypothesis(m: Modulus, d1: int, d2: int) -> bool:
    if d1 == m.value and d2 == m.value:
        return False
    e1, e2 = m.divisor_idx(d1).exponents, m.divisor_idx(d2).exponents
    return all(a != b or a == n for a, b, (_, n) in zip(e1, e2, m.primes))


def enhanced_exclusion_check(pair: TilingPair, x: int, y: int, d1: int, d2: int) -> bool:
    m = pair.modulus
    if not exclusion_hypothesis(m, d1, d2):
        raise ValueError("m, m' do not satisfy the exponent hypothesis")
    divs = _scale_divisors(m.value)
    ba = box_matrix(pair.a, m.value)[x % m.value]
    bb = box_matrix(pair.b, m.value)[y % m.value]
    j1, j2 = divs.index(d1), divs.index(d2)
    return int(ba[j1]) * int(ba[j2]) * int(bb[j1]) * int(bb[j2]) == 0


def exclusion_scan(pair: TilingPair) -> list[tuple[int, int]]:
    """All admissible (m, m') realised together on both sides for some x and some y.

    A^M_m[x] A^M_m'[x] B^M_m[y] B^M_m'[y] splits into an x-factor and a
    y-factor, so scanning every (x, y) reduces to two co-occurrence tables.
    """
    m = pair.modulus
    divs = _scale_divisors(m.value)
    sa = (box_matrix(pair.a, m.value) > 0).astype(np.int64)
    sb = (box_matrix(pair.b, m.value) > 0).astype(np.int64)
    ca = sa.T @ sa > 0
    cb = sb.T @ sb > 0
    bad = []
    for j1, j2 in combinations(range(len(divs)), 2):
        if ca[j1, j2] and cb[j1, j2] and exclusion_hypothesis(m, divs[j1], divs[j2]):
            bad.append((divs[j1], divs[j2]))
    return bad


# ---------------------------------------------------------------------------
# no missing joints


def top_divisors(m: Modulus) -> list[int]:
    """Proper divisors m with D(M) | m.  M itself always lies in Div(B), and x not in A never produces it."""
    D = m.top_grid(m.value)
    return [d for d in m.divisors() if d % D == 0 and d != m.value]


def joint_hypothesis(pair: TilingPair) -> bool:
    return not (set(top_divisors(pair.modulus)) & set(divisor_set(pair.b).values))


def missing_joint_scan(pair: TilingPair):
    """x not in A with (x - a_i, M) = M/p_i for some a_i, every i.  None if the hypothesis fails."""
    m = pair.modulus
    if not joint_hypothesis(pair):
        return None
    divs = _scale_divisors(m.value)
    cols = [divs.index(m.value // p) for p, _ in m.primes]
    bx = box_matrix(pair.a, m.value)
    hit = np.all(bx[:, cols] > 0, axis=1)
    hit &= pair.a.weights == 0
    return [int(x) for x in np.flatnonzero(hit)]


def joints_in(A: Multiset) -> list[int]:
    """Same scan without the tiling hypothesis (used on non-tilings)."""
    m = A.modulus
    divs = _scale_divisors(m.value)
    cols = [divs.index(m.value // p) for p, _ in m.primes]
    bx = box_matrix(A, m.value)
    hit = np.all(bx[:, cols] > 0, axis=1) & (A.weights == 0)
    return [int(x) for x in np.flatnonzero(hit)]


# ---------------------------------------------------------------------------
# assignment functions on a top-level grid


@dataclass
class TwoDirectionsResult:
    applicable: bool
    ok: bool
    assignments: int = 0
    max_values: int = 0
    overflow: bool = False
    witness: dict | None = None


def two_directions_check(pair, x0: int, budget: int = MAX_BRANCHES) -> TwoDirectionsResult:
    """Every way of splitting A cap Lambda(x0, D(M)) into disjoint M-fibers uses at most two directions.

    ``pair`` may also be a bare Multiset, for probing sets that are not known tiles.
    """
    A = pair if isinstance(pair, Multiset) else pair.a
    m = A.modulus
    if m.K != 3:
        raise ValueError("needs exactly three primes")
    D = m.top_grid(m.value)
    grid = set(m.grid(x0, D))
    pts = sorted(a for a in A.support if a in grid)
    if not pts:
        return TwoDirectionsResult(False, True)
    fib = {}
    for a in pts:
        fib[a] = []
        for i in range(3):
            F = frozenset(m.fiber(a, i))
            if F <= set(pts):
                fib[a].append((i, F))
    count = 0
    nodes = 0
    maxv = 0
    witness = None
    overflow = False

    def rec(rest: frozenset, dirs: frozenset):
        nonlocal count, nodes, maxv, witness, overflow
        nodes += 1
        if nodes > budget:
            overflow = True
            return
        if not rest:
            count += 1
            maxv = max(maxv, len(dirs))
            if len(dirs) > 2 and witness is None:
                witness = {"directions": sorted(dirs)}
            return
        a = min(rest)
        for i, F in fib[a]:
            if F <= rest:
                rec(rest - F, dirs | {i})
                if overflow:
                    return

    rec(frozenset(pts), frozenset())
    if count == 0 and not overflow:
        return TwoDirectionsResult(False, True)
    return TwoDirectionsResult(True, maxv <= 2, count, maxv, overflow, witness)


# ---------------------------------------------------------------------------
# 1-dimensional saturating spaces


@dataclass
class OneDimStructure:
    ok: bool
    pa: frozenset = frozenset()
    pb: frozenset = frozenset()
    A0: tuple = ()
    B0: tuple = ()
    chains_a: list = field(default_factory=list)
    chains_b: list = field(default_factory=list)
    reason: str = ""


def one_dim_hypothesis(pair: TilingPair, x: int, y: int, i: int, gamma: int) -> bool:
    m = pair.modulus
    p = m.primes[i][0]
    d = m.value // p**gamma
    j = _scale_divisors(m.value).index(d)
    ba = box_matrix(pair.a, m.value)[x % m.value, j]
    bb = box_matrix(pair.b, m.value)[y % m.value, j]
    return x % m.value not in pair.a and int(ba) * int(bb) == euler_phi(p**gamma)


def one_dim_structure(pair: TilingPair, x: int, y: int, i: int, gamma: int) -> OneDimStructure:
    """Decompose A_{x,y}, B_{y,x} into fiber chains when a single divisor M/p_i^gamma saturates."""
    m = pair.modulus
    p, n = m.primes[i]
    if not 1 <= gamma <= n:
        return OneDimStructure(False, reason="gamma out of range")
    if not one_dim_hypothesis(pair, x, y, i, gamma):
        return OneDimStructure(False, reason="saturation hypothesis fails")
    Axy = saturating_pairs(pair.a, pair.b, x, y)
    Byx = saturating_pairs(pair.b, pair.a, y, x)
    step = m.value // p ** (gamma - 1)
    levels = set(range(1, gamma))

    def classes(S):
        out: dict[int, list] = {}
        for s in S:
            out.setdefault(s % step, []).append(s)
        return [tuple(sorted(v)) for _, v in sorted(out.items(), key=lambda kv: min(kv[1]))]

    ca, cb = classes(Axy), classes(Byx)
    def within(cls):
        out = set()
        for c in cls:
            out |= set(divisor_set(Multiset.from_elements(m, c)).values)
        return out

    dA, dB = within(ca), within(cb)
    pa = frozenset(l for l in levels if m.value // p**l in dA)
    pb = frozenset(l for l in levels if m.value // p**l in dB)
    A0 = tuple(c[0] for c in ca)
    B0 = tuple(c[0] for c in cb)
    res = OneDimStructure(False, pa, pb, A0, B0, ca, cb)
    if pa & pb or pa | pb != levels:
        res.reason = "levels do not split between A and B"
        return res
    if sorted((len(A0), len(B0))) != sorted((1, p - 1)):
        res.reason = f"root counts {len(A0)}, {len(B0)}"
        return res
    if not all(is_chain(c, m, i, pa) for c in ca) or not all(is_chain(c, m, i, pb) for c in cb):
        res.reason = "classes are not fiber chains"
        return res
    res.ok = True
    return res


def onedivisor_check(pair: TilingPair, x: int, y: int, i: int) -> bool:
    """If A_{x,y} lies on the line through x in direction i, one divisor M/p_i^alpha saturates."""
    m = pair.modulus
    line = set(m.line(x % m.value, i))
    Axy = saturating_pairs(pair.a, pair.b, x, y)
    if not set(Axy) <= line:
        return True
    p, n = m.primes[i]
    divs = _scale_divisors(m.value)
    ba = box_matrix(pair.a, m.value)[x % m.value]
    bb = box_matrix(pair.b, m.value)[y % m.value]
    hits = [(al, int(ba[divs.index(m.value // p**al)]) * int(bb[divs.index(m.value // p**al)])) for al in range(n + 1)]
    nz = [(al, v) for al, v in hits if v]
    return len(nz) == 1 and nz[0][1] == euler_phi(p ** nz[0][0])
