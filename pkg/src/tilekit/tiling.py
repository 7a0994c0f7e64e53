"""Tiling verification, divisor sets, standard complements and replacement."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import gcd, prod

import numpy as np

from . import cyclotomic as cy
from .multiset import Multiset, from_set
from .zmod import Modulus, as_modulus


class VerificationError(ValueError):
    pass


class CriteriaDisagree(RuntimeError):
    """Raised when independent tiling criteria give different answers (a bug)."""


# ---------------------------------------------------------------------------
# divisor sets


@dataclass(frozen=True)
class DivisorSet:
    N: int
    values: frozenset

    def __contains__(self, m):
        return int(m) in self.values

    def __iter__(self):
        return iter(sorted(self.values))

    def __len__(self):
        return len(self.values)

    def __and__(self, other):
        vals = other.values if isinstance(other, DivisorSet) else frozenset(other)
        return DivisorSet(self.N, self.values & vals)

    def __eq__(self, other):
        if isinstance(other, DivisorSet):
            return self.N == other.N and self.values == other.values
        if isinstance(other, (set, frozenset)):
            return self.values == other
        return NotImplemented

    def __hash__(self):
        return hash((self.N, self.values))

    def idx(self, M=None):
        m = as_modulus(M if M is not None else self.N)
        return [m.divisor_idx(v) for v in sorted(self.values)]

    def __repr__(self):
        return f"Div_{self.N}{sorted(self.values)}"


def _diff_gcds(elems, N: int) -> np.ndarray:
    e = np.asarray(elems, dtype=np.int64)
    d = np.subtract.outer(e, e).ravel() % N
    g = np.gcd(d, N)
    g[d == 0] = N
    return g


def divisor_set(A, N: int | None = None) -> DivisorSet:
    """Div_N(A) = {(a - a', N) : a, a' in A}."""
    if isinstance(A, Multiset):
        M, elems = A.M, A.support
    else:
        raise TypeError("expected a Multiset")
    N = M if N is None else int(N)
    if N <= 0 or M % N:
        raise ValueError(f"{N} does not divide {M}")
    if not elems:
        return DivisorSet(N, frozenset())
    elems = np.unique(np.asarray(elems) % N)
    vals = np.unique(_diff_gcds(elems, N))
    return DivisorSet(N, frozenset(int(v) for v in vals))


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class Criteria:
    direct: bool
    divisor_exclusion: bool
    cyclotomic: bool


@dataclass(frozen=True)
class TilingPair:
    """A verified tiling A + B = Z_M, stored normalised so that 0 is in A and B."""

    a: Multiset
    b: Multiset
    modulus: Modulus
    verified: Criteria
    shift_a: int = 0  # raw A = a + shift_a
    shift_b: int = 0

    @property
    def M(self) -> int:
        return self.modulus.value

    def raw(self) -> tuple[Multiset, Multiset]:
        return self.a.translate(self.shift_a), self.b.translate(self.shift_b)

    def swap(self) -> "TilingPair":
        return TilingPair(self.b, self.a, self.modulus, self.verified, self.shift_b, self.shift_a)

    def to_json(self) -> dict:
        return {"modulus": self.M, "a": list(self.a.support), "b": list(self.b.support)}


@dataclass
class VerifyReport:
    tiles: bool
    criteria: Criteria
    sizes_ok: bool
    failed: str | None = None  # first violated criterion
    witness: dict = field(default_factory=dict)
    pair: TilingPair | None = None

    def to_json(self) -> dict:
        out = {
            "tiles": self.tiles,
            "sizes_ok": self.sizes_ok,
            "criteria": {
                "direct": self.criteria.direct,
                "divisor_exclusion": self.criteria.divisor_exclusion,
                "cyclotomic": self.criteria.cyclotomic,
            },
        }
        if self.failed:
            out["failed"] = self.failed
            out["witness"] = self.witness
        if self.pair is not None:
            out["normalized"] = self.pair.to_json()
            out["shift"] = {"a": self.pair.shift_a, "b": self.pair.shift_b}
        return out


def _coerce(X, M) -> Multiset:
    if isinstance(X, Multiset):
        if M is not None and X.M != as_modulus(M).value:
            raise ValueError("modulus mismatch")
        return X
    if M is None:
        raise ValueError("modulus required for raw element lists")
    return from_set(X, M)


def _check_set(A: Multiset, name: str):
    if not A.is_set():
        raise VerificationError(f"{name} is not a set")
    if not A.support:
        raise VerificationError(f"{name} is empty")


def verify(A, B, M=None) -> VerifyReport:
    """Decide A + B = Z_M by exact cover, divisor exclusion and cyclotomic divisibility.

    All three run every time and must agree.
    """
    A, B = _coerce(A, M), _coerce(B, M if M is not None else A.M if isinstance(A, Multiset) else None)
    if A.M != B.M:
        raise ValueError("A and B live in different groups")
    _check_set(A, "A")
    _check_set(B, "B")
    mod = A.modulus
    Mv = mod.value
    # normalise: witnesses refer to the translated copies
    sa, sb = A.support[0], B.support[0]
    An, Bn = A.translate(-sa), B.translate(-sb)
    sizes_ok = A.total * B.total == Mv
    witness: dict = {}

    cover = (An * Bn).weights
    direct = bool(np.all(cover == 1))
    if not direct:
        x = int(np.flatnonzero(cover != 1)[0])
        witness["direct"] = {"element": x, "multiplicity": int(cover[x])}

    shared = (divisor_set(An) & divisor_set(Bn)).values - {Mv}
    div_ok = sizes_ok and not shared
    if shared:
        witness["divisor_exclusion"] = {"shared_divisor": min(shared)}

    cyc_ok = sizes_ok
    if sizes_ok:
        for s in mod.divisors():
            if s == 1:
                continue
            if not (cy.divides(s, An) or cy.divides(s, Bn)):
                cyc_ok = False
                witness["cyclotomic"] = {"undivided": s}
                break

    crit = Criteria(direct, div_ok, cyc_ok)
    if len({direct, div_ok, cyc_ok}) != 1:
        raise CriteriaDisagree(f"tiling criteria disagree: {crit} for A={A}, B={B}")
    failed = None
    if not direct:
        failed = "sizes" if not sizes_ok else "direct"
        if not sizes_ok:
            witness["sizes"] = {"A": A.total, "B": B.total, "M": Mv}
    pair = TilingPair(An, Bn, mod, crit, sa, sb) if direct else None
    return VerifyReport(direct, crit, sizes_ok, failed, witness, pair)


def make_pair(A, B, M=None) -> TilingPair:
    rep = verify(A, B, M)
    if not rep.tiles:
        raise VerificationError(f"not a tiling ({rep.failed}: {rep.witness})")
    return rep.pair


# ---------------------------------------------------------------------------
# standard sets


def flat_exponents(A: Multiset, sa=None) -> list[tuple[int, ...]]:
    """The exponent sets {alpha : Phi_{p_i^alpha} | A}, one tuple per prime."""
    sa = cy.prime_power_divisors(A) if sa is None else sa
    return [
        tuple(a for a in range(1, n + 1) if p**a in sa) for p, n in A.modulus.primes
    ]


def standard_set(M, exponents) -> Multiset:
    """The set {x : pi_{i, alpha-1}(x) = 0 for alpha not in exponents[i]}."""
    mod = as_modulus(M)
    per_axis = []
    for (p, n), ex in zip(mod.primes, exponents):
        vals = [0]
        for a in ex:
            vals = [v + d * p ** (a - 1) for v in vals for d in range(p)]
        per_axis.append(vals)
    els = sorted(mod.from_coords(pi) for pi in product(*per_axis))
    return from_set(els, mod)


def standard_complement(A: Multiset, sa=None) -> Multiset:
    """A-flat: the standard set with the same prime power cyclotomic divisors as A."""
    return standard_set(A.modulus, flat_exponents(A, sa))


def standard_divisors(A: Multiset, sa=None) -> DivisorSet:
    """Closed form for Div(A-flat): prod p_i^(alpha_i - 1), alpha_i in exponents or n_i + 1."""
    mod = A.modulus
    opts = [
        [p ** (a - 1) for a in ex] + [p**n]
        for (p, n), ex in zip(mod.primes, flat_exponents(A, sa))
    ]
    return DivisorSet(mod.value, frozenset(prod(c) for c in product(*opts)))


@dataclass(frozen=True)
class ReplacementRecord:
    div_exclusion: bool  # Div(A-flat) cap Div(B) = {M}
    flat_tiles: bool  # A-flat + B = Z_M
    b_t2: bool

    @property
    def agree(self) -> bool:
        return self.div_exclusion == self.flat_tiles == self.b_t2


def replacement_check(pair: TilingPair) -> ReplacementRecord:
    if not isinstance(pair, TilingPair):
        raise VerificationError("replacement_check needs a verified TilingPair")
    flat = standard_complement(pair.a)
    M = pair.M
    i = (divisor_set(flat) & divisor_set(pair.b)).values == {M}
    ii = flat.total * pair.b.total == M and bool(np.all((flat * pair.b).weights == 1))
    iii = cy.t2_check(pair.b)
    return ReplacementRecord(i, ii, iii)


def tijdeman_scale(A: Multiset, r: int) -> Multiset:
    if gcd(int(r), A.total) != 1:
        raise ValueError(f"gcd({r}, |A|) != 1")
    return A.dilate(r)


def plane_bound_check(pair: TilingPair, x: int, i: int, alpha: int) -> bool:
    """|A cap Pi(x, p_i^(n_i - alpha))| <= p_i^alpha * prod_{nu != i} p_nu^beta_nu."""
    mod = pair.modulus
    p, n = mod.primes[i]
    if not 0 <= alpha <= n:
        raise ValueError("alpha out of range")
    size = pair.a.total
    beta_i = 0
    while size % p == 0:
        size //= p
        beta_i += 1
    step = p ** (n - alpha)
    count = int(pair.a.weights[(x % step)::step].sum())
    return count <= p**alpha * size


def plane_bound_scan(pair: TilingPair) -> list[tuple[int, int, int]]:
    """All (x mod step, i, alpha) violating the plane bound (expected: none)."""
    bad = []
    mod = pair.modulus
    for i, (p, n) in enumerate(mod.primes):
        for alpha in range(n + 1):
            step = p ** (n - alpha)
            for x in range(step):
                if not plane_bound_check(pair, x, i, alpha):
                    bad.append((x, i, alpha))
    return bad
