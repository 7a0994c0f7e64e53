"""Exact cyclotomic arithmetic and the (T1)/(T2) conditions.

Divisibility Phi_s | A(X) is decided without floating point.  Two routes are
provided and cross-checked in the test suite:

``remainder``
    fold A(X) mod X^s - 1, then long-divide by Phi_s with Python integers.
``basis`` (default)
    A(zeta_s) = 0 is decided by peeling one prime at a time off s, using that
    1, zeta_q, ..., zeta_q^(q-2) is a basis of Q(zeta_{qr}) over Q(zeta_r).
    Each step is a reshape and a subtraction, so whole batches vectorise.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import prod

import numpy as np

from .multiset import Multiset
from .zmod import _trial_factor, as_modulus, mobius, radical


@dataclass(frozen=True)
class IntPoly:
    coeffs: tuple[int, ...]  # constant term first

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(int(x) for x in c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        if not self.coeffs or not other.coeffs:
            return IntPoly(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(tuple(out))

    def divmod_monic(self, d: "IntPoly") -> tuple["IntPoly", "IntPoly"]:
        if not d.coeffs or d.coeffs[-1] != 1:
            raise ValueError("divisor must be monic")
        r = list(self.coeffs)
        q = [0] * max(0, len(r) - d.degree)
        nz = [(j, c) for j, c in enumerate(d.coeffs[:-1]) if c]
        for k in range(len(r) - 1, d.degree - 1, -1):
            c = r[k]
            if c:
                s = k - d.degree
                q[s] = c
                r[k] = 0
                for j, dj in nz:
                    r[s + j] -= c * dj
        return IntPoly(tuple(q)), IntPoly(tuple(r[: d.degree]))

    def is_zero(self) -> bool:
        return not self.coeffs


def _binomial(d: int) -> IntPoly:
    """X^d - 1."""
    return IntPoly((-1,) + (0,) * (d - 1) + (1,))


_cache_lock = threading.Lock()
_cyclo_cache: dict[int, IntPoly] = {1: IntPoly((-1, 1))}


def cyclotomic_poly(s: int) -> IntPoly:
    """Phi_s(X), memoised.

    Built from the square-free kernel r of s via X^n - 1 = prod_{d|n} Phi_d,
    inverted by Moebius as Phi_r = prod_{d|r} (X^d - 1)^mu(r/d) (exact
    multiplications and divisions by binomials), then Phi_s = Phi_r(X^{s/r}).
    """
    s = int(s)
    if s < 1:
        raise ValueError("s must be positive")
    got = _cyclo_cache.get(s)
    if got is not None:
        return got
    r = radical(s)
    if r == s:
        primes = [p for p, _ in _trial_factor(r)]
        num, den = IntPoly((1,)), IntPoly((1,))
        for sub in product((0, 1), repeat=len(primes)):
            d = prod(p for p, b in zip(primes, sub) if b)
            if mobius(r // d) == 1:
                num = num * _binomial(d)
            else:
                den = den * _binomial(d)
        q, rem = num.divmod_monic(den if den.coeffs[-1] == 1 else IntPoly(tuple(-c for c in den.coeffs)))
        if not rem.is_zero():
            raise ArithmeticError("non-exact cyclotomic division")
        if den.coeffs[-1] != 1:
            q = IntPoly(tuple(-c for c in q.coeffs))
        poly = q
    else:
        base = cyclotomic_poly(r)
        e = s // r
        c = [0] * (base.degree * e + 1)
        for k, a in enumerate(base.coeffs):
            c[k * e] = a
        poly = IntPoly(tuple(c))
    with _cache_lock:
        _cyclo_cache[s] = poly
    return poly


# ---------------------------------------------------------------------------
# divisibility


def _fold(weights: np.ndarray, s: int) -> np.ndarray:
    """Coefficients of A(X) mod X^s - 1 (s must divide len(weights))."""
    n = weights.shape[-1]
    return weights.reshape(weights.shape[:-1] + (n // s, s)).sum(axis=-2)


@lru_cache(maxsize=None)
def _crt_index(q: int, r: int) -> np.ndarray:
    """idx[a, b] = the k in Z_{qr} with k = a mod q, k = b mod r."""
    k = np.arange(q * r)
    idx = np.empty((q, r), dtype=np.int64)
    idx[k % q, k % r] = k
    return idx


def _vanish_squarefree(rows: np.ndarray, primes: list[int]) -> np.ndarray:
    """For each row u (length r = prod primes), whether u(zeta_r) = 0."""
    n_rows = rows.shape[0]
    owner = np.arange(n_rows)
    cur = rows
    r = cur.shape[1]
    for q in primes:
        rp = r // q
        c = cur[:, _crt_index(q, rp)]  # (rows, q, rp)
        d = c[:, : q - 1, :] - c[:, q - 1 : q, :]
        cur = d.reshape(-1, rp)
        owner = np.repeat(owner, q - 1)
        r = rp
    bad = cur[:, 0] != 0
    ok = np.ones(n_rows, dtype=bool)
    ok[owner[bad]] = False
    return ok


def vanishes_batch(vectors: np.ndarray, s: int) -> np.ndarray:
    """Row-wise test Phi_s | V(X) for polynomials given mod X^s - 1 (shape (k, s))."""
    v = np.asarray(vectors)
    if v.ndim == 1:
        v = v[None, :]
    if v.shape[1] != s:
        raise ValueError("vectors must be reduced mod X^s - 1")
    if s == 1:
        return v[:, 0] == 0
    primes = [p for p, _ in _trial_factor(s)]
    r = prod(primes)
    e = s // r
    bound = int(np.abs(v).sum(axis=1).max(initial=0)) if v.dtype != object else None
    if bound is None or bound * 2 ** len(primes) >= 2**62:
        v = v.astype(object)
    rows = v.reshape(v.shape[0], r, e).transpose(0, 2, 1).reshape(-1, r)
    ok = _vanish_squarefree(rows, primes)
    return ok.reshape(v.shape[0], e).all(axis=1)


def _remainder(weights, s: int) -> IntPoly:
    folded = [int(x) for x in _fold(np.asarray(weights), s)]
    return IntPoly(tuple(folded)).divmod_monic(cyclotomic_poly(s))[1]


def _uniform(A: Multiset, s: int) -> bool:
    """Prime-power criterion: |A cap Pi(x, p^a)| = |A cap Pi(x, p^(a-1))| / p for all x."""
    fs = _trial_factor(s)
    if len(fs) != 1:
        raise ValueError("uniform criterion needs a prime power")
    p, a = fs[0]
    fine = _fold(A.weights, p**a)
    coarse = _fold(A.weights, p ** (a - 1))
    return bool(np.all(fine * p == np.tile(coarse, p)))


def divides(s: int, A: Multiset, method: str = "basis") -> bool:
    """Whether Phi_s(X) divides A(X), with A taken mod X^M - 1."""
    s = int(s)
    if s == 1 or A.M % s:
        raise ValueError(f"need s | M and s != 1 (s={s}, M={A.M})")
    if method == "basis":
        return bool(vanishes_batch(_fold(A.weights, s), s)[0])
    if method == "remainder":
        return _remainder(A.weights, s).is_zero()
    if method == "uniform":
        return _uniform(A, s)
    raise ValueError(f"unknown method {method!r}")


def divides_all(A: Multiset, divisors) -> dict[int, bool]:
    return {s: divides(s, A) for s in divisors}


# ---------------------------------------------------------------------------
# profiles and the (T1)/(T2) conditions


@dataclass(frozen=True)
class CycloProfile:
    sa: frozenset[int]
    full: frozenset[int]


def prime_powers(M) -> list[tuple[int, int, int]]:
    """(i, alpha, p^alpha) for every prime power dividing M."""
    m = as_modulus(M)
    return [(i, a, p**a) for i, (p, n) in enumerate(m.primes) for a in range(1, n + 1)]


def prime_power_divisors(A: Multiset) -> frozenset[int]:
    """S_A."""
    return frozenset(q for _, _, q in prime_powers(A.modulus) if divides(q, A))


def profile(A: Multiset) -> CycloProfile:
    if A.total == 0 and not A.support:
        raise ValueError("empty multiset")
    divs = [s for s in A.modulus.divisors() if s != 1]
    folded = {s: _fold(A.weights, s) for s in divs}
    full = frozenset(s for s in divs if vanishes_batch(folded[s], s)[0])
    sa = frozenset(q for _, _, q in prime_powers(A.modulus) if q in full)
    return CycloProfile(sa, full)


def t1_check(A: Multiset, sa=None) -> bool:
    if not A.support:
        raise ValueError("empty set")
    sa = prime_power_divisors(A) if sa is None else sa
    return A.total == prod(_trial_factor(q)[0][0] for q in sa)


def t2_selections(sa) -> list[int]:
    """Products s_1...s_k (k >= 2) of elements of S_A that are powers of distinct primes."""
    by_prime: dict[int, list[int]] = {}
    for q in sa:
        by_prime.setdefault(_trial_factor(q)[0][0], []).append(q)
    ps = sorted(by_prime)
    out = []
    for k in range(2, len(ps) + 1):
        for chosen in combinations(ps, k):
            for pick in product(*(sorted(by_prime[p]) for p in chosen)):
                out.append(prod(pick))
    return sorted(out)


def t2_failures(A: Multiset, sa=None) -> list[int]:
    sa = prime_power_divisors(A) if sa is None else sa
    return [s for s in t2_selections(sa) if not divides(s, A)]


def t2_check(A: Multiset, sa=None) -> bool:
    if not A.support:
        raise ValueError("empty set")
    return not t2_failures(A, sa)
