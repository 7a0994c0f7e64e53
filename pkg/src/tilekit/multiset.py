"""Weighted multisets on Z_M, i.e. integer mask polynomials mod X^M - 1."""
from __future__ import annotations

import numpy as np

from .zmod import Modulus, as_modulus

_LIMIT = 2**62


class Multiset:
    """Integer weight vector over Z_M.

    ``weights[a]`` is the coefficient of X^a.  Instances are immutable; the
    weight array is read-only.
    """

    __slots__ = ("modulus", "weights", "_support")

    def __init__(self, modulus, weights):
        m = as_modulus(modulus)
        w = np.asarray(weights, dtype=np.int64)
        if w.shape != (m.value,):
            raise ValueError(f"expected {m.value} weights, got shape {w.shape}")
        w = w.copy()
        w.flags.writeable = False
        self.modulus = m
        self.weights = w
        self._support = None

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, M) -> "Multiset":
        m = as_modulus(M)
        return cls(m, np.zeros(m.value, dtype=np.int64))

    @classmethod
    def from_weights(cls, M, weights: dict) -> "Multiset":
        m = as_modulus(M)
        w = np.zeros(m.value, dtype=np.int64)
        for a, c in weights.items():
            a = int(a)
            if not 0 <= a < m.value:
                raise ValueError(f"element {a} out of range for Z_{m.value}")
            w[a] += int(c)
        return cls(m, w)

    @classmethod
    def from_elements(cls, M, elements) -> "Multiset":
        """Multiset with weight = number of occurrences (elements reduced mod M)."""
        m = as_modulus(M)
        w = np.zeros(m.value, dtype=np.int64)
        np.add.at(w, np.asarray(list(elements), dtype=np.int64) % m.value, 1)
        return cls(m, w)

    # inspection -----------------------------------------------------------

    @property
    def M(self) -> int:
        return self.modulus.value

    @property
    def support(self) -> tuple[int, ...]:
        if self._support is None:
            self._support = tuple(int(a) for a in np.flatnonzero(self.weights))
        return self._support

    def elements(self) -> list[int]:
        if not self.is_set():
            raise ValueError("multiset is not a set")
        return list(self.support)

    def is_set(self) -> bool:
        return bool(np.all((self.weights == 0) | (self.weights == 1)))

    @property
    def total(self) -> int:
        """A(1)."""
        return int(self.weights.sum())

    def __len__(self):
        return self.total

    def __contains__(self, x):
        return bool(self.weights[int(x) % self.M])

    def __iter__(self):
        return iter(self.support)

    def __eq__(self, other):
        return (
            isinstance(other, Multiset)
            and self.M == other.M
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.M, self.weights.tobytes()))

    def __repr__(self):
        if self.is_set():
            return f"Set(M={self.M}, {list(self.support)})"
        return f"Multiset(M={self.M}, {{{', '.join(f'{a}: {int(self.weights[a])}' for a in self.support)}}})"

    def l1(self) -> int:
        return int(np.abs(self.weights).sum())

    # algebra --------------------------------------------------------------

    def _check(self, other):
        if self.M != other.M:
            raise ValueError(f"modulus mismatch: {self.M} vs {other.M}")

    def __add__(self, other: "Multiset") -> "Multiset":
        self._check(other)
        if self.l1() + other.l1() >= _LIMIT:
            raise OverflowError("weight overflow in add")
        return Multiset(self.modulus, self.weights + other.weights)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c: int) -> "Multiset":
        if abs(c) * self.l1() >= _LIMIT:
            raise OverflowError("weight overflow in scale")
        return Multiset(self.modulus, self.weights * int(c))

    def translate(self, t: int) -> "Multiset":
        return Multiset(self.modulus, np.roll(self.weights, int(t) % self.M))

    def dilate(self, r: int) -> "Multiset":
        """Image under x -> r x (weights add on collisions)."""
        w = np.zeros(self.M, dtype=np.int64)
        idx = np.arange(self.M, dtype=np.int64) * (int(r) % self.M) % self.M
        np.add.at(w, idx, self.weights)
        return Multiset(self.modulus, w)

    def convolve(self, other: "Multiset") -> "Multiset":
        """(A*B)(X) = A(X) B(X) mod X^M - 1."""
        self._check(other)
        if self.l1() * other.l1() >= _LIMIT:
            raise OverflowError("weight overflow in convolve")
        a, b = self, other
        if len(a.support) > len(b.support):
            a, b = b, a
        out = np.zeros(self.M, dtype=np.int64)
        for x in a.support:
            out += a.weights[x] * np.roll(b.weights, x)
        return Multiset(self.modulus, out)

    __mul__ = convolve

    def reduce_mod(self, N: int) -> "Multiset":
        """Induced multiset on Z_N: w^N(x) = sum of w(x') over x' = x mod N."""
        N = int(N)
        if N <= 0 or self.M % N:
            raise ValueError(f"{N} does not divide {self.M}")
        w = self.weights.reshape(self.M // N, N).sum(axis=0)
        return Multiset(self.modulus.sub(N), w)

    def restrict(self, X) -> "Multiset":
        mask = np.zeros(self.M, dtype=bool)
        mask[list(X)] = True
        return Multiset(self.modulus, np.where(mask, self.weights, 0))

    def lift(self, M) -> "Multiset":
        """Same residues viewed in Z_M for a multiple M of this modulus (no periodisation)."""
        m = as_modulus(M)
        if m.value % self.M:
            raise ValueError("target modulus must be a multiple")
        w = np.zeros(m.value, dtype=np.int64)
        w[: self.M] = self.weights
        return Multiset(m, w)

    # serialisation --------------------------------------------------------

    def to_json(self) -> dict:
        if self.is_set():
            return {"modulus": self.M, "elements": list(self.support)}
        return {
            "modulus": self.M,
            "weights": {str(a): int(self.weights[a]) for a in self.support},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Multiset":
        if "modulus" not in obj:
            raise ValueError("missing 'modulus'")
        if "elements" in obj:
            return from_set(obj["elements"], obj["modulus"])
        if "weights" in obj:
            return cls.from_weights(obj["modulus"], obj["weights"])
        raise ValueError("expected 'elements' or 'weights'")


def from_set(elements, M) -> Multiset:
    m = as_modulus(M)
    els = [int(e) for e in elements]
    for e in els:
        if not 0 <= e < m.value:
            raise ValueError(f"element {e} out of range for Z_{m.value}")
    if len(set(els)) != len(els):
        raise ValueError("duplicate elements in a set")
    w = np.zeros(m.value, dtype=np.int64)
    w[els] = 1
    return Multiset(m, w)


def is_set(A: Multiset) -> bool:
    return A.is_set()


def whole(M) -> Multiset:
    m = as_modulus(M)
    return Multiset(m, np.ones(m.value, dtype=np.int64))


def ap(M, step: int, count: int, start: int = 0) -> Multiset:
    """Arithmetic progression {start + k*step : 0 <= k < count} as a multiset."""
    m = as_modulus(M)
    return Multiset.from_elements(m, [(start + k * step) for k in range(count)])
