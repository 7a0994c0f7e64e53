"""N-boxes, the box product and the Ramanujan-sum identity, all in exact arithmetic."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

import numpy as np

from .multiset import Multiset
from .tiling import TilingPair
from .zmod import _divisors_of, _trial_factor, as_modulus, euler_phi, mobius


@lru_cache(maxsize=None)
def _scale_divisors(N: int) -> tuple[int, ...]:
    return tuple(sorted(_divisors_of(N, _trial_factor(N)))) if N > 1 else (1,)


@dataclass(frozen=True)
class NBox:
    scale: int
    entries: tuple[int, ...]  # aligned with _scale_divisors(scale)

    @property
    def divisors(self) -> tuple[int, ...]:
        return _scale_divisors(self.scale)

    def __getitem__(self, m: int) -> int:
        return self.entries[self.divisors.index(int(m))]

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.divisors, self.entries))

    @property
    def sigma(self) -> int:
        return sum(self.entries)


def _gcd_index(N: int) -> np.ndarray:
    """pos[k] = index of gcd(k, N) in the sorted divisor list (gcd(0, N) = N)."""
    divs = _scale_divisors(N)
    where = {d: j for j, d in enumerate(divs)}
    g = np.gcd(np.arange(N), N)
    g[0] = N
    return np.array([where[int(v)] for v in g], dtype=np.int64)


_gcd_index = lru_cache(maxsize=None)(_gcd_index)


def _check_scale(A: Multiset, N: int):
    N = int(N)
    if N <= 0 or A.M % N:
        raise ValueError(f"{N} does not divide {A.M}")
    return N


def box_matrix(A: Multiset, N: int) -> np.ndarray:
    """Row x holds the N-box of A at x, for every x in Z_N (shape (N, tau(N)))."""
    N = _check_scale(A, N)
    w = A.reduce_mod(N).weights
    pos = _gcd_index(N)
    out = np.zeros((N, len(_scale_divisors(N))), dtype=np.int64)
    sup = np.flatnonzero(w)
    xs = np.arange(N)
    for a in sup:
        np.add.at(out, (xs, pos[(xs - a) % N]), w[a])
    return out


def nbox_of(A: Multiset, N: int, C: Multiset) -> NBox:
    """A^N_m[C] = sum_{x} w_C(x) A^N_m[x], with C on the same group as A."""
    N = _check_scale(A, N)
    wa = A.reduce_mod(N).weights
    wc = C.reduce_mod(N).weights
    pos = _gcd_index(N)
    ent = np.zeros(len(_scale_divisors(N)), dtype=object)
    for x in np.flatnonzero(wc):
        for a in np.flatnonzero(wa):
            ent[pos[(x - a) % N]] += int(wc[x]) * int(wa[a])
    return NBox(N, tuple(int(e) for e in ent))


def nbox(A: Multiset, N: int, x: int) -> NBox:
    N = _check_scale(A, N)
    row = box_matrix(A, N)[int(x) % N]
    return NBox(N, tuple(int(e) for e in row))


@lru_cache(maxsize=None)
def _phi_weights(N: int) -> tuple[int, ...]:
    return tuple(euler_phi(N // m) for m in _scale_divisors(N))


def box_product(A_box: NBox, B_box: NBox) -> Fraction:
    if A_box.scale != B_box.scale:
        raise ValueError("box scales differ")
    return sum(
        (Fraction(a * b, f) for a, b, f in zip(A_box.entries, B_box.entries, _phi_weights(A_box.scale))),
        Fraction(0),
    )


def product_table(A: Multiset, B: Multiset, N: int) -> tuple[np.ndarray, int]:
    """All <A^N[x], B^N[y]> scaled by L = lcm of phi(N/m): returns (integer table, L)."""
    N = _check_scale(A, N)
    L = lcm(*_phi_weights(N))
    scale = np.array([L // f for f in _phi_weights(N)], dtype=np.int64)
    ba, bb = box_matrix(A, N), box_matrix(B, N)
    bound = int(np.abs(ba).max(initial=0)) * int(np.abs(bb).max(initial=0)) * L * ba.shape[1]
    if bound >= 2**62:
        ba, bb, scale = ba.astype(object), bb.astype(object), scale.astype(object)
    return (ba * scale) @ bb.T, L


def ortho_all(pair: TilingPair, N: int) -> bool:
    """<A^N[x], B^N[y]> = M/N for every x, y in Z_N."""
    t, L = product_table(pair.a, pair.b, N)
    return bool(np.all(t * N == L * pair.M))


def converse_check(A: Multiset, B: Multiset) -> bool:
    """Whether <A^M[a], B^M[b]> = 1 for all a in A, b in B (with |A||B| = M)."""
    M = A.M
    if A.total * B.total != M:
        return False
    ba, bb = box_matrix(A, M), box_matrix(B, M)
    L = lcm(*_phi_weights(M))
    scale = np.array([L // f for f in _phi_weights(M)], dtype=np.int64)
    t = (ba[list(A.support)] * scale) @ bb[list(B.support)].T
    return bool(np.all(t == L))


def linear_span_product(coeffs_A: dict, coeffs_B: dict, pair: TilingPair, N: int) -> Fraction:
    """<sum c_x A^N[x], sum d_y B^N[y]> for rational coefficient maps x -> c_x."""
    ba, bb = box_matrix(pair.a, N), box_matrix(pair.b, N)
    va = [sum((Fraction(c) * int(ba[int(x) % N, j]) for x, c in coeffs_A.items()), Fraction(0)) for j in range(ba.shape[1])]
    vb = [sum((Fraction(c) * int(bb[int(y) % N, j]) for y, c in coeffs_B.items()), Fraction(0)) for j in range(bb.shape[1])]
    return sum((a * b / f for a, b, f in zip(va, vb, _phi_weights(N))), Fraction(0))


def combo_sigma(coeffs: dict, box_total: int) -> Fraction:
    return sum((Fraction(c) for c in coeffs.values()), Fraction(0)) * box_total


# ---------------------------------------------------------------------------
# Ramanujan sums


def ramanujan(d: int, k: int) -> int:
    """c_d(k) = mu(d/g) phi(d) / phi(d/g), g = gcd(k, d)."""
    d = int(d)
    if d <= 0:
        raise ValueError("d must be positive")
    g = gcd(int(k), d) or d
    return mobius(d // g) * euler_phi(d) // euler_phi(d // g)


@lru_cache(maxsize=None)
def _ramanujan_row(d: int, n: int) -> np.ndarray:
    """c_d(k) for k in Z_n (d | n)."""
    return np.array([ramanujan(d, k) for k in range(n)], dtype=np.int64)


def _pair_sum(A: Multiset, C: Multiset, d: int, N: int) -> int:
    """sum_{a, c} w_A(a) w_C(c) c_d(a - c), over Z_N."""
    wa = A.reduce_mod(N).weights.astype(object)
    wc = C.reduce_mod(N).weights.astype(object)
    corr = np.zeros(N, dtype=object)
    for c in np.flatnonzero(wc):
        corr += wc[c] * np.roll(wa, -int(c))  # corr[k] = sum_c w_A(c + k) w_C(c)
    return int(np.dot(corr, _ramanujan_row(d, N).astype(object)))


def energy(A: Multiset, d: int) -> int:
    if A.M % d:
        raise ValueError(f"{d} does not divide {A.M}")
    return _pair_sum(A, A, d, A.M)


def identity_sides(A, B, C, D, N: int) -> tuple[Fraction, Fraction]:
    """Both sides of <A^N[C], B^N[D]> = sum_{d|N} S_d(A,C) S_d(B,D) / (N phi(d))."""
    lhs = box_product(nbox_of(A, N, C), nbox_of(B, N, D))
    rhs = Fraction(0)
    for d in _scale_divisors(N):
        rhs += Fraction(_pair_sum(A, C, d, N) * _pair_sum(B, D, d, N), N * euler_phi(d))
    return lhs, rhs


def identity_check(A, B, C, D, N: int) -> bool:
    for X in (A, B, C, D):
        _check_scale(X, N)
    lhs, rhs = identity_sides(A, B, C, D, N)
    return lhs == rhs
