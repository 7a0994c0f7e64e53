"""Factored moduli, array coordinates, and grids/planes/lines/fibers in Z_M."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import gcd, prod

import numpy as np

MAX_MODULUS = 2**32


def _trial_factor(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


@dataclass(frozen=True)
class DivisorIdx:
    """A divisor of M stored as its exponent vector over the primes of M."""

    exponents: tuple[int, ...]
    modulus: "Modulus" = field(repr=False, compare=False)

    @property
    def value(self) -> int:
        return prod(p**g for (p, _), g in zip(self.modulus.primes, self.exponents))

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class Coords:
    pi: tuple[int, ...]
    digits: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Modulus:
    value: int
    primes: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if prod(p**n for p, n in self.primes) != self.value:
            raise ValueError("prime factorization does not multiply back to M")
        ps = [p for p, _ in self.primes]
        if ps != sorted(set(ps)) or any(n < 1 for _, n in self.primes):
            raise ValueError("primes must be strictly increasing with positive exponents")

    @property
    def M(self) -> int:
        return self.value

    @property
    def K(self) -> int:
        return len(self.primes)

    @property
    def cofactors(self) -> tuple[int, ...]:
        return tuple(self.value // p**n for p, n in self.primes)

    def __repr__(self):
        fac = "·".join(f"{p}^{n}" if n > 1 else str(p) for p, n in self.primes)
        return f"Modulus({self.value}={fac})"

    def __int__(self):
        return self.value

    # divisors -------------------------------------------------------------

    def divisor_idx(self, m: int) -> DivisorIdx:
        if m <= 0 or self.value % m:
            raise ValueError(f"{m} does not divide {self.value}")
        ex = []
        for p, _ in self.primes:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            ex.append(e)
        return DivisorIdx(tuple(ex), self)

    def divisors(self, of: int | None = None) -> list[int]:
        """Divisors of ``of`` (default M), in exponent-vector order."""
        n = self.value if of is None else of
        if self.value % n:
            raise ValueError(f"{n} does not divide {self.value}")
        return _divisors_of(n, self.primes)

    def exponent(self, m: int, i: int) -> int:
        """Exponent of p_i in m."""
        p = self.primes[i][0]
        e = 0
        while m and m % p == 0:
            m //= p
            e += 1
        return e

    def sub(self, N: int) -> "Modulus":
        """The factored form of a divisor N of M (primes with exponent 0 dropped)."""
        if self.value % N:
            raise ValueError(f"{N} does not divide {self.value}")
        return factor(N) if N >= 2 else Modulus(1, ())

    # coordinates ----------------------------------------------------------

    def to_coords(self, x: int) -> Coords:
        if not 0 <= x < self.value:
            raise ValueError(f"{x} out of range for Z_{self.value}")
        pis, digs = [], []
        for (p, n), Mi in zip(self.primes, self.cofactors):
            q = p**n
            # x = pi*Mi mod p^n
            pi = (x * pow(Mi, -1, q)) % q
            pis.append(pi)
            d, t = [], pi
            for _ in range(n):
                d.append(t % p)
                t //= p
            digs.append(tuple(d))
        return Coords(tuple(pis), tuple(digs))

    def from_coords(self, pi) -> int:
        if isinstance(pi, Coords):
            pi = pi.pi
        return sum(c * Mi for c, Mi in zip(pi, self.cofactors)) % self.value

    def pi(self, x: int, i: int) -> int:
        p, n = self.primes[i]
        q = p**n
        return (x * pow(self.cofactors[i], -1, q)) % q

    def gcd_div(self, x: int) -> DivisorIdx:
        return self.divisor_idx(gcd(x % self.value, self.value) or self.value)

    def gcd_via_digits(self, x: int, y: int) -> int:
        """(x - y, M) read off from the first differing base-p_i digit per coordinate."""
        cx, cy = self.to_coords(x % self.value), self.to_coords(y % self.value)
        out = 1
        for (p, n), dx, dy in zip(self.primes, cx.digits, cy.digits):
            g = n
            for j in range(n):
                if dx[j] != dy[j]:
                    g = j
                    break
            out *= p**g
        return out

    # geometry -------------------------------------------------------------

    def grid(self, x: int, D: int) -> list[int]:
        """Lambda(x, D) = x + D Z_M."""
        if D <= 0 or self.value % D:
            raise ValueError(f"{D} does not divide {self.value}")
        return sorted((x + D * t) % self.value for t in range(self.value // D))

    def plane(self, x: int, i: int, alpha: int) -> list[int]:
        p, n = self.primes[i]
        if not 0 <= alpha <= n:
            raise ValueError("plane exponent out of range")
        return self.grid(x, p**alpha)

    def line(self, x: int, i: int) -> list[int]:
        return self.grid(x, self.cofactors[i])

    def fiber(self, x: int, i: int) -> list[int]:
        return self.grid(x, self.value // self.primes[i][0])

    def top_grid(self, N: int) -> int:
        """D(N): the step of the top-level grid on scale N."""
        idx = self.divisor_idx(N)
        return prod(p ** max(0, g - 1) for (p, _), g in zip(self.primes, idx.exponents))

    # cached tables --------------------------------------------------------

    def gcd_table(self) -> np.ndarray:
        return _gcd_table(self.value)


def _divisors_of(n: int, primes) -> list[int]:
    ranges = []
    for p, _ in primes:
        e = 0
        while n % p**(e + 1) == 0:
            e += 1
        ranges.append([p**k for k in range(e + 1)])
    return [prod(c) for c in product(*ranges)]


@lru_cache(maxsize=None)
def _gcd_table(M: int) -> np.ndarray:
    t = np.gcd(np.arange(M, dtype=np.int64), M)
    t[0] = M
    t.flags.writeable = False
    return t


@lru_cache(maxsize=None)
def factor(M: int) -> Modulus:
    """Factor M by trial division."""
    M = int(M)
    if M < 2:
        raise ValueError("modulus must be at least 2")
    if M > MAX_MODULUS:
        raise ValueError("modulus above 2^32 is out of scope")
    return Modulus(M, tuple(_trial_factor(M)))


def as_modulus(M) -> Modulus:
    return M if isinstance(M, Modulus) else factor(M)


def euler_phi(n: int) -> int:
    out = n
    for p, _ in _trial_factor(n):
        out = out // p * (p - 1)
    return out


def mobius(n: int) -> int:
    fs = _trial_factor(n)
    if any(e > 1 for _, e in fs):
        return 0
    return -1 if len(fs) % 2 else 1


def radical(n: int) -> int:
    return prod(p for p, _ in _trial_factor(n))
