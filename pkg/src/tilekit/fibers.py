"""Fibers, fiber chains, cofibered structures, fiber shifting and Szabo-type examples."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import cyclotomic as cy
from .multiset import Multiset, from_set
from .tiling import TilingPair, divisor_set, make_pair, standard_set, verify
from .zmod import as_modulus


class ShiftRejected(ValueError):
    pass


# ---------------------------------------------------------------------------
# standard fibers


def standard_fiber(N: int, p: int, delta: int, M=None) -> Multiset:
    """Psi_{N/p^delta}: {k N/p^delta : 0 <= k < p}, in Z_M (default Z_N)."""
    N = int(N)
    if delta < 1 or N % p**delta:
        raise ValueError(f"need p^delta | N (p={p}, delta={delta}, N={N})")
    m = as_modulus(N if M is None else M)
    if m.value % N:
        raise ValueError("N must divide M")
    step = N // p**delta
    return from_set(sorted({k * step % m.value for k in range(p)}), m)


def fiber_divisors(N: int, p: int, delta: int) -> list[int]:
    """{s | N, s != 1 : p^(nu - delta + 1) exactly divides s}, where p^nu || N."""
    m = as_modulus(N)
    nu = m.exponent(N, [q for q, _ in m.primes].index(p))
    e = nu - delta + 1
    return sorted(s for s in m.divisors() if s != 1 and m.exponent(s, [q for q, _ in m.primes].index(p)) == e)


def psi_product_divides(A: Multiset, i: int, alphas) -> bool:
    """prod_{alpha} Psi_{M/p_i^alpha} | A (the Psi's are coprime squarefree products of Phi_s)."""
    m = A.modulus
    p, n = m.primes[i]
    for a in alphas:
        for s in m.divisors():
            if s != 1 and m.exponent(s, i) == n - a + 1 and not cy.divides(s, A):
                return False
    return True


# ---------------------------------------------------------------------------
# fibered sets


@dataclass(frozen=True)
class FiberDecomposition:
    N: int
    i: int
    roots: tuple[int, ...]  # lexicographically least root of each fiber, mod N
    multiplicity: int


def detect_fibered(A: Multiset, i: int, N: int | None = None) -> FiberDecomposition | None:
    """Disjoint N-fibers in the p_i direction with a common multiplicity, or None."""
    m = A.modulus
    N = m.value if N is None else int(N)
    p = m.primes[i][0]
    if N % p:
        raise ValueError(f"p_{i} does not divide N")
    w = A.reduce_mod(N).weights
    sup = np.flatnonzero(w)
    if not len(sup):
        return None
    c = int(w[sup[0]])
    if not np.all(w[sup] == c) or not np.array_equal(np.roll(w, N // p), w):
        return None
    step = N // p
    roots = sorted({int(x) % step for x in sup})
    # root = least element of each coset x + step Z_N
    return FiberDecomposition(N, i, tuple(roots), c)


def is_fibered(A: Multiset, i: int, N: int | None = None) -> bool:
    return detect_fibered(A, i, N) is not None


def _digits_ok(T, p, gamma, pset) -> bool:
    """Level conditions for a subset T of Z_{p^gamma} to be a pset-chain."""
    levels = {gamma - a for a in pset}
    for L in levels:
        cnt: dict[int, int] = {}
        for t in T:
            r = t % p ** (L + 1)
            cnt[r] = cnt.get(r, 0) + 1
        vals = set(cnt.values())
        if len(vals) != 1:
            return False
        for r in cnt:
            if (r + p**L) % p ** (L + 1) not in cnt:
                return False
    return True


@dataclass(frozen=True)
class FiberChain:
    i: int
    pset: frozenset
    elements: tuple[int, ...]
    root: int
    M: int

    @property
    def gamma(self) -> int:
        return max(self.pset) if self.pset else 0

    def as_set(self) -> Multiset:
        return from_set(sorted(self.elements), self.M)


def is_chain(F, M, i: int, pset) -> bool:
    """Definition check: |F| = p^|P| and F is M/p^(alpha-1)-fibered for every alpha in P."""
    m = as_modulus(M)
    S = F if isinstance(F, Multiset) else from_set(sorted(F), m)
    p, n = m.primes[i]
    pset = set(pset)
    if any(not 1 <= a <= n for a in pset):
        return False
    if S.total != p ** len(pset) or not S.is_set():
        return False
    return all(is_fibered(S, i, m.value // p ** (a - 1)) for a in pset)


def _chain_search(avail: set, p: int, gamma: int, pset, need_zero: bool, limit=None):
    """Subsets T of avail (in Z_{p^gamma}) forming pset-chains, via level-by-level splits."""
    levels = {gamma - a for a in pset}
    size = p ** len(pset)
    out = []

    # prefix -> count of elements of avail below each prefix, to prune
    def below(prefix, L):
        mod = p**L
        return sum(1 for t in avail if t % mod == prefix)

    def split(states, L):
        # states: list of (prefix mod p^L, count)
        if limit is not None and len(out) >= limit:
            return
        if L == gamma:
            if all(c == 1 for _, c in states):
                out.append(tuple(sorted(pr for pr, _ in states)))
            return
        if L in levels:
            counts = {c for _, c in states}
            if len(counts) != 1 or next(iter(counts)) % p:
                return
            c = next(iter(counts)) // p
            nxt = []
            for pr, _ in states:
                for d in range(p):
                    q = pr + d * p**L
                    if below(q, L + 1) < c:
                        return
                    nxt.append((q, c))
            split(nxt, L + 1)
            return
        # free level: distribute each prefix's count over available digits
        options = []
        for pr, c in states:
            digs = [d for d in range(p) if below(pr + d * p**L, L + 1) > 0]
            zero_prefix = need_zero and pr == 0
            opts = []
            for comp in _compositions(c, digs, p, L, pr, below):
                if zero_prefix and comp.get(0, 0) == 0:
                    continue
                opts.append(comp)
            if not opts:
                return
            options.append((pr, opts))
        for choice in product(*(o for _, o in options)):
            nxt = []
            for (pr, _), comp in zip(options, choice):
                for d, k in sorted(comp.items()):
                    nxt.append((pr + d * p**L, k))
            split(nxt, L + 1)
            if limit is not None and len(out) >= limit:
                return

    split([(0, size)], 0)
    return out


def _compositions(c, digs, p, L, pr, below):
    """Ways to write c as a sum over available digits with capacity limits."""
    caps = [min(c, below(pr + d * p**L, L + 1)) for d in digs]
    res = []

    def rec(j, left, cur):
        if j == len(digs):
            if left == 0:
                res.append(dict(cur))
            return
        for k in range(min(left, caps[j]), -1, -1):
            if k:
                cur[digs[j]] = k
            rec(j + 1, left - k, cur)
            cur.pop(digs[j], None)

    rec(0, c, {})
    return res


def chains_at(A: Multiset, i: int, pset, root: int, limit=None) -> list[FiberChain]:
    """All pset-chains in the p_i direction with root in them and contained in A."""
    m = A.modulus
    p, n = m.primes[i]
    pset = frozenset(pset)
    if not pset:
        return [FiberChain(i, pset, (root,), root, m.value)] if root in A else []
    gamma = max(pset)
    unit = m.value // p**gamma
    avail = set()
    for t in range(p**gamma):
        if (root + t * unit) % m.value in A:
            avail.add(t)
    if 0 not in avail:
        return []
    out = []
    for T in _chain_search(avail, p, gamma, pset, True, limit):
        els = tuple(sorted((root + t * unit) % m.value for t in T))
        out.append(FiberChain(i, pset, els, root, m.value))
    return out


def detect_pset_fibered(A: Multiset, i: int, pset) -> list[FiberChain] | None:
    """Partition of A into disjoint pset-chains in the p_i direction (lexicographically least), or None."""
    m = A.modulus
    p, n = m.primes[i]
    pset = frozenset(pset)
    if not pset:
        return [FiberChain(i, pset, (a,), a, m.value) for a in A.support]
    gamma = max(pset)
    unit = m.value // p**gamma
    if A.total % p ** len(pset):
        return None
    chains = []
    rest = set(A.support)
    while rest:
        r = min(rest)
        coset = {(r + t * unit) % m.value for t in range(p**gamma)}
        T = {((x - r) % m.value) // unit for x in coset & rest}
        part = _partition_chains(T, p, gamma, pset)
        if part is None:
            return None
        for ch in part:
            els = tuple(sorted((r + t * unit) % m.value for t in ch))
            chains.append(FiberChain(i, pset, els, els[0], m.value))
        rest -= coset
    return chains


def _partition_chains(T: set, p, gamma, pset):
    if not T:
        return []
    t0 = min(T)
    shifted = {(t - t0) % p**gamma for t in T}
    for ch in _chain_search(shifted, p, gamma, pset, True):
        real = {(t + t0) % p**gamma for t in ch}
        sub = _partition_chains(T - real, p, gamma, pset)
        if sub is not None:
            return [tuple(sorted(real))] + sub
    return None


def chain_properties_check(F: FiberChain) -> dict:
    """The properties of a pset-chain: Psi divisibility, size, divisors, subgroup tiling."""
    m = as_modulus(F.M)
    p, n = m.primes[F.i]
    S = F.as_set()
    res = {
        "psi_divides": psi_product_divides(S, F.i, F.pset),
        "size": S.total == p ** len(F.pset),
        "divisors": {m.value // p**a for a in F.pset} <= set(divisor_set(S).values),
    }
    if F.pset:
        gamma = F.gamma
        G = from_set([0], m)
        for tau in range(1, gamma):
            if tau not in F.pset:
                G = G * standard_fiber(m.value, p, tau)
        base = S.translate(-F.elements[0])
        prod_ = (base * G).weights
        sub = np.zeros(m.value, dtype=np.int64)
        sub[:: m.value // p**gamma] = 1
        res["subgroup_tiling"] = bool(np.array_equal(prod_, sub))
    else:
        res["subgroup_tiling"] = True
    res["ok"] = all(res.values())
    return res


# ---------------------------------------------------------------------------
# cofibered structures and shifts


@dataclass
class CofiberedStructure:
    i: int
    gamma: int
    pa: frozenset
    pb: frozenset
    cofibers: list  # FiberChain in A
    fibration: list  # FiberChain decomposition of B

    def to_json(self) -> dict:
        return {
            "direction": self.i,
            "depth": self.gamma,
            "P_A": sorted(self.pa),
            "P_B": sorted(self.pb),
            "cofibers": [list(c.elements) for c in self.cofibers],
            "B_chains": len(self.fibration),
        }


def _partitions(gamma: int):
    full = list(range(1, gamma + 1))
    for bits in product((0, 1), repeat=gamma):
        pa = frozenset(a for a, b in zip(full, bits) if b)
        yield pa, frozenset(full) - pa


def all_cofibered(pair: TilingPair, i: int, gamma: int, cofiber_limit: int | None = 32) -> list[CofiberedStructure]:
    m = pair.modulus
    p, n = m.primes[i]
    if not 2 <= gamma <= n:
        return []
    out = []
    for pa, pb in _partitions(gamma):
        fib = detect_pset_fibered(pair.b, i, pb)
        if fib is None:
            continue
        cof = []
        seen = set()
        for a in pair.a.support:
            for ch in chains_at(pair.a, i, pa, a, limit=4):
                key = ch.elements
                if key not in seen:
                    seen.add(key)
                    cof.append(ch)
            if cofiber_limit is not None and len(cof) >= cofiber_limit:
                break
        if cof:
            out.append(CofiberedStructure(i, gamma, pa, pb, cof, fib))
    return out


def find_cofibered(pair: TilingPair, i: int, gamma: int) -> CofiberedStructure | None:
    got = all_cofibered(pair, i, gamma, cofiber_limit=1)
    return got[0] if got else None


@dataclass
class ShiftResult:
    pair: TilingPair | None
    tiles: bool
    t2_before: bool
    t2_after: bool
    shifted: tuple[int, ...]
    witness: dict = field(default_factory=dict)

    @property
    def t2_preserved(self) -> bool:
        return self.t2_before == self.t2_after


def shift_set(A: Multiset, F, delta: int) -> Multiset:
    """A + (X^delta - 1) F, required to stay a set."""
    Fs = F.as_set() if isinstance(F, FiberChain) else F
    for x in Fs.support:
        if x not in A:
            raise ShiftRejected(f"{x} of the chain is not in A")
    new = A - Fs + Fs.translate(delta)
    if not new.is_set():
        bad = [int(x) for x in np.flatnonzero(new.weights > 1)]
        raise ShiftRejected(f"shift collides at {bad[:4]}")
    return new


def fiber_shift(pair: TilingPair, structure: CofiberedStructure, F: FiberChain, beta: int, k: int = 1) -> ShiftResult:
    m = pair.modulus
    p, n = m.primes[structure.i]
    if beta not in structure.pb:
        raise ShiftRejected(f"beta={beta} not in P_B={sorted(structure.pb)}")
    if k % p == 0:
        raise ShiftRejected("k must be coprime to p_i")
    delta = k * m.value // p**beta % m.value
    newA = shift_set(pair.a, F, delta)
    rep = verify(newA, pair.b)
    t2b = cy.t2_check(pair.a)
    t2a = cy.t2_check(newA)
    shifted = tuple(sorted((x + delta) % m.value for x in F.elements))
    if rep.tiles:
        # keep the original frame: no renormalisation of A
        from .tiling import Criteria

        newpair = TilingPair(newA, pair.b, m, rep.criteria)
    else:
        newpair = None
    return ShiftResult(newpair, rep.tiles, t2b, t2a, shifted, rep.witness)


# ---------------------------------------------------------------------------
# Szabo-type examples


def _coords_point(m, digits):
    """x with pi_i = p_i * d_i (second digit d_i, first digit 0)."""
    return m.from_coords(tuple(p * d for (p, _), d in zip(m.primes, digits)))


def szabo_construct(p1: int, p2: int, p3: int, return_fibers: bool = False):
    """Start from the standard pair at M = (p1 p2 p3)^2 and shift one M-fiber per direction by M/p_i^2."""
    ps = [int(p1), int(p2), int(p3)]
    for p in ps:
        if p < 3 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise ValueError("primes must be odd primes")
    if len(set(ps)) != 3:
        raise ValueError("primes must be distinct")
    ps.sort()
    M = (ps[0] * ps[1] * ps[2]) ** 2
    m = as_modulus(M)
    A = standard_set(m, [(2,)] * 3)
    B = standard_set(m, [(1,)] * 3)
    pair = make_pair(A, B)
    lines = _select_lines(ps)
    chosen = []
    for i, fixed in enumerate(lines):
        els = []
        for d in range(ps[i]):
            dig = list(fixed)
            dig.insert(i, d)
            els.append(_coords_point(m, dig))
        F = FiberChain(i, frozenset({1}), tuple(sorted(els)), min(els), M)
        struct = CofiberedStructure(i, 2, frozenset({1}), frozenset({2}), [F], detect_pset_fibered(pair.b, i, {2}) or [])
        if not struct.fibration:
            raise RuntimeError(f"B is not {{2}}-fibered in direction {i}")
        res = fiber_shift(pair, struct, F, 2, 1)
        if not res.tiles:
            raise RuntimeError(f"shift in direction {i} broke the tiling: {res.witness}")
        pair = res.pair
        chosen.append((F, res.shifted))
    final = make_pair(pair.a, pair.b)
    if return_fibers:
        return final, chosen
    return final


def _select_lines(ps):
    """Fixed coordinates of three pairwise disjoint lines (one per direction) avoiding the origin.

    Line i is given by the two coordinates other than i.  Lines in directions
    i and j meet iff they agree on the third coordinate k and each contains the
    other's point, so candidates are tried in coordinate order with backtracking.
    """

    def cands(i):
        others = [j for j in range(3) if j != i]
        return [
            (u, v)
            for u in range(ps[others[0]])
            for v in range(ps[others[1]])
            if (u, v) != (0, 0)
        ]

    def line_pts(i, fixed):
        pts = set()
        for d in range(ps[i]):
            dig = list(fixed)
            dig.insert(i, d)
            pts.add(tuple(dig))
        return pts

    def rec(i, chosen, used):
        if i == 3:
            return chosen
        for c in sorted(cands(i), key=lambda t: (0 in t, t)):
            pts = line_pts(i, c)
            if pts & used:
                continue
            got = rec(i + 1, chosen + [c], used | pts)
            if got:
                return got
        return None

    sel = rec(0, [], set())
    if sel is None:
        raise RuntimeError("no admissible fiber selection")
    return sel
