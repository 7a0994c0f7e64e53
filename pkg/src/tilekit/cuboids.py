"""Cuboid types, evaluations and nullity; classic, folding and multiscale variants."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import gcd, prod

import numpy as np

from . import cyclotomic as cy
from .multiset import Multiset
from .zmod import Modulus, as_modulus

MAX_COMBOS = 10**6


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class CuboidType:
    N: int
    delta: tuple[int, ...]  # indexed like the primes of the ambient modulus
    template: Multiset  # lives on Z_N
    ambient: Modulus

    def __post_init__(self):
        if self.ambient.value % self.N:
            raise ValueError("scale must divide M")
        if len(self.delta) != self.ambient.K:
            raise ValueError("one delta per prime of M")
        for i, d in enumerate(self.delta):
            if not 0 <= d <= self.ambient.exponent(self.N, i):
                raise ValueError(f"delta_{i}={d} out of range for N={self.N}")
        if self.template.M != self.N:
            raise ValueError("template must live on Z_N")
        if not self.template.support:
            raise ValueError("template must be nonempty")

    @property
    def jset(self) -> tuple[int, ...]:
        return tuple(j for j, d in enumerate(self.delta) if d)

    def steps(self) -> dict[int, int]:
        """j -> N / p_j^delta_j."""
        return {j: self.N // self.ambient.primes[j][0] ** self.delta[j] for j in self.jset}

    def offset_choices(self, j: int, dedupe: bool = True) -> list[int]:
        """Residues d mod N with (d, N) = N / p_j^delta_j (up to sign if dedupe)."""
        p = self.ambient.primes[j][0]
        q = p ** self.delta[j]
        base = self.N // q
        out = []
        for u in range(1, q):
            if u % p == 0:
                continue
            if dedupe and (q - u) % q < u:
                continue  # -d gives the same nullity condition
            out.append(base * u % self.N)
        return out

    def n_shapes(self, dedupe: bool = True) -> int:
        return prod(len(self.offset_choices(j, dedupe)) for j in self.jset)


@dataclass(frozen=True)
class Cuboid:
    c: int
    d: dict  # j -> d_j in Z_M (or Z_N)

    def vertices(self, modulus: int) -> list[tuple[int, int]]:
        js = sorted(self.d)
        out = []
        for eps in product((0, 1), repeat=len(js)):
            x = (self.c + sum(e * self.d[j] for e, j in zip(eps, js))) % modulus
            out.append((x, -1 if sum(eps) % 2 else 1))
        return out

    def as_multiset(self, M) -> Multiset:
        m = as_modulus(M)
        return Multiset.from_weights(m, _accumulate(self.vertices(m.value)))


def _accumulate(pairs):
    out: dict[int, int] = {}
    for x, w in pairs:
        out[x] = out.get(x, 0) + w
    return out


def classic_type(M, N: int) -> CuboidType:
    m = as_modulus(M)
    delta = tuple(1 if N % p == 0 else 0 for p, _ in m.primes)
    return CuboidType(N, delta, Multiset.from_elements(m.sub(N), [0]), m)


def _check_cuboid(ctype: CuboidType, cub: Cuboid):
    if set(cub.d) != set(ctype.jset):
        raise ValueError("cuboid directions do not match the type")
    for j, step in ctype.steps().items():
        if gcd(int(cub.d[j]) % ctype.N, ctype.N) != step:
            raise ValueError(f"offset d_{j}={cub.d[j]} violates (d_j, N) = {step}")


def _induced(A: Multiset, N: int) -> np.ndarray:
    if A.M % N:
        raise ValueError(f"{N} does not divide {A.M}")
    return A.reduce_mod(N).weights


def _template_sum(A: Multiset, ctype: CuboidType) -> np.ndarray:
    """g[y] = sum_t w_T(t) A^N_N[y + t] for every y in Z_N."""
    w = _induced(A, ctype.N)
    g = np.zeros(ctype.N, dtype=np.int64)
    for t in ctype.template.support:
        g += int(ctype.template.weights[t]) * np.roll(w, -t)
    return g


def evaluate(A: Multiset, ctype: CuboidType, cub: Cuboid) -> int:
    """A^T[Delta]: signed sum over the vertices of A^N_N[x * T]."""
    _check_cuboid(ctype, cub)
    w = _induced(A, ctype.N)
    N = ctype.N
    total = 0
    for x, s in cub.vertices(N):
        for t in ctype.template.support:
            total += s * int(ctype.template.weights[t]) * int(w[(x + t) % N])
    return total


def null_violations(A: Multiset, ctype: CuboidType, limit: int | None = 1):
    """Cuboids of the given type with nonzero evaluation (first ``limit`` of them)."""
    if ctype.n_shapes() > MAX_COMBOS:
        raise BudgetExceeded(f"{ctype.n_shapes()} offset combinations")
    g = _template_sum(A, ctype)
    js = ctype.jset
    choices = [ctype.offset_choices(j) for j in js]
    found = []
    for ds in product(*choices):
        h = g
        for d in ds:
            h = h - np.roll(h, -d)
        nz = np.flatnonzero(h)
        for c in nz:
            found.append((Cuboid(int(c), dict(zip(js, ds))), int(h[c])))
            if limit is not None and len(found) >= limit:
                return found
    return found


def _enumerate_null(A: Multiset, ctype: CuboidType) -> bool:
    return not null_violations(A, ctype, limit=1)


def _folding_target(ctype: CuboidType) -> int | None:
    """If ctype is the folding shape (M, delta^M_N, T^M_N), return N."""
    m = ctype.ambient
    if ctype.N != m.value:
        return None
    T = ctype.template
    sup = T.support
    if not T.is_set() or 0 not in sup:
        return None
    step = sup[1] if len(sup) > 1 else m.value
    if m.value % step or len(sup) != m.value // step:
        return None
    if list(sup) != list(range(0, m.value, step)):
        return None
    N = step
    if ctype.delta != folding_deltas(m, N):
        return None
    return N


def is_null(A: Multiset, ctype: CuboidType, method: str = "auto") -> bool:
    """Whether every cuboid of type ctype evaluates to 0 on A."""
    if method not in ("auto", "enumerate"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        T = ctype.template
        if T.support == (0,) and T.weights[0] == 1 and ctype.delta == classic_type(ctype.ambient, ctype.N).delta:
            if ctype.N == 1:
                return A.total == 0
            return cy.divides(ctype.N, A.reduce_mod(ctype.N))
        N = _folding_target(ctype)
        if N is not None and N > 1:
            return cy.divides(N, A)
    return _enumerate_null(A, ctype)


def lemma_hypothesis(A: Multiset, ctype: CuboidType) -> bool:
    """Every Phi_m (m | N) divides A, T, or some 1 - X^(N / p_j^delta_j)."""
    N = ctype.N
    steps = list(ctype.steps().values())
    AN = A.reduce_mod(N)
    for m in as_modulus(ctype.ambient).divisors(N):
        if any(s % m == 0 for s in steps):
            continue
        if m == 1:
            if AN.total == 0 or ctype.template.total == 0:
                continue
            return False
        if cy.divides(m, AN) or cy.divides(m, ctype.template):
            continue
        return False
    return True


# ---------------------------------------------------------------------------
# folding and multiscale


def folding_template(M, N: int) -> Multiset:
    """T^M_N = (X^M - 1)/(X^N - 1) = 1 + X^N + ... + X^(M - N)."""
    m = as_modulus(M)
    if N <= 0 or m.value % N:
        raise ValueError(f"{N} does not divide {m.value}")
    return Multiset.from_elements(m, range(0, m.value, N))


def folding_deltas(M, N: int) -> tuple[int, ...]:
    m = as_modulus(M)
    out = []
    for i, (p, n) in enumerate(m.primes):
        alpha = n - m.exponent(N, i)
        out.append(alpha + 1 if alpha < n else 0)
    return tuple(out)


def folding_type(M, N: int) -> CuboidType:
    m = as_modulus(M)
    return CuboidType(m.value, folding_deltas(m, N), folding_template(m, N), m)


def cyclotomic_via_cuboids(A: Multiset, N: int) -> bool:
    """Phi_N | A decided by enumerating cuboids of the folding type."""
    return _enumerate_null(A, folding_type(A.modulus, N))


def grid_restricted_divides(A: Multiset, N: int) -> bool:
    """Phi_N divides the mask polynomial of A cap Lambda(x, D(N)) for every x."""
    m = A.modulus
    D = m.top_grid(N)
    for x in range(D):
        sub = A.restrict(range(x, m.value, D))
        if not cy.divides(N, sub):
            return False
    return True


PRESETS = ("ex1", "ex1-fold", "ex2", "ex3")


def multiscale_preset(name: str, M, i: int, alpha: int | None = None) -> CuboidType:
    m = as_modulus(M)
    p, n = m.primes[i]
    base = [1] * m.K
    one = Multiset.from_elements(m, [0])
    if name in ("ex1", "ex1-fold"):
        if n < 2:
            raise ValueError("needs n_i >= 2")
        base[i] = 2
        T = one if name == "ex1" else folding_template(m, m.value // p)
        return CuboidType(m.value, tuple(base), T, m)
    if name == "ex2":
        if alpha is None or not 1 <= alpha <= n:
            raise ValueError("ex2 needs 1 <= alpha <= n_i")
        base[i] = alpha + 1 if alpha < n else 0
        return CuboidType(m.value, tuple(base), one, m)
    if name == "ex3":
        if n < 2:
            raise ValueError("needs n_i >= 2")
        base[i] = 3 if n >= 3 else 0
        step = m.value // p**2
        T = Multiset.from_elements(m, [k * step for k in range(p)])
        return CuboidType(m.value, tuple(base), T, m)
    raise ValueError(f"unknown preset {name!r}")


def preset_divisors(name: str, M, i: int, alpha: int | None = None) -> list[int]:
    m = as_modulus(M)
    p = m.primes[i][0]
    Mv = m.value
    if name == "ex1":
        return [Mv, Mv // p]
    if name == "ex1-fold":
        return [Mv // p]
    if name == "ex2":
        return [Mv // p**k for k in range(alpha + 1)]
    if name == "ex3":
        return [Mv, Mv // p**2]
    raise ValueError(f"unknown preset {name!r}")


def preset_null_check(A: Multiset, name: str, i: int, alpha: int | None = None) -> bool:
    """Equivalence (ex1, ex1-fold, ex2) or implication (ex3) between divisibility and nullity."""
    ctype = multiscale_preset(name, A.modulus, i, alpha)
    div = all(cy.divides(s, A) for s in preset_divisors(name, A.modulus, i, alpha))
    null = _enumerate_null(A, ctype)
    if name == "ex3":
        return null or not div
    return div == null


# ---------------------------------------------------------------------------
# matrices for exhaustive checks


@lru_cache(maxsize=None)
def classic_cuboid_matrix(N: int) -> np.ndarray:
    """Rows = signed vertex vectors of all N-cuboids (up to sign), shape (k, N)."""
    ctype = classic_type(N, N)
    rows = []
    for ds in product(*(ctype.offset_choices(j) for j in ctype.jset)):
        for c in range(N):
            r = np.zeros(N, dtype=np.int64)
            for x, s in Cuboid(c, dict(zip(ctype.jset, ds))).vertices(N):
                r[x] += s
            rows.append(r)
    out = np.array(rows)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def remainder_matrix(N: int) -> np.ndarray:
    """Row k = coefficients of X^k mod Phi_N(X), shape (N, phi(N))."""
    phi = cy.cyclotomic_poly(N)
    deg = phi.degree
    out = np.zeros((N, deg), dtype=np.int64)
    for k in range(N):
        r = cy.IntPoly((0,) * k + (1,)).divmod_monic(phi)[1]
        out[k, : len(r.coeffs)] = r.coeffs
    out.flags.writeable = False
    return out
