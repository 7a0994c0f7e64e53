"""Subgroup and slab reductions, and a driver that chains them down to base cases."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from . import cyclotomic as cy
from .multiset import Multiset, from_set
from .tiling import TilingPair, VerificationError, divisor_set, make_pair, tijdeman_scale, verify
from .zmod import as_modulus


class NotApplicable(ValueError):
    pass


# ---------------------------------------------------------------------------
# subgroup reduction


def tau(s: int, p: int) -> int:
    """Divisor transfer under X -> X^p: Phi_tau(s)(X) | F(X^p) iff Phi_s | F."""
    return p * s if s % p == 0 else s


@dataclass
class SubgroupReduction:
    i: int
    a_reduced: Multiset  # A(X) = A'(X^p)
    b_classes: dict  # residue r -> B_r on Z_{M/p}
    pairs: dict  # r -> TilingPair over Z_{M/p}
    tau_ok: bool

    def to_json(self) -> dict:
        return {
            "kind": "subgroup",
            "i": self.i,
            "a": list(self.a_reduced.support),
            "b_classes": {str(r): list(B.support) for r, B in self.b_classes.items()},
            "tau_ok": self.tau_ok,
        }


def tau_check(A: Multiset, Ared: Multiset, p: int) -> bool:
    """Phi_tau(s) | A iff Phi_s | A' for every s | M/p, and tau is injective there."""
    N = Ared.M
    ds = as_modulus(A.M).divisors(N) if N > 1 else [1]
    seen = set()
    for s in ds:
        t = tau(s, p)
        if t in seen or A.M % t:
            return False
        seen.add(t)
        if s == 1:
            continue
        if cy.divides(t, A) != cy.divides(s, Ared):
            return False
    return True


def subgroup_reduce(pair: TilingPair, i: int) -> SubgroupReduction:
    """Split A + B = Z_M with A in p_i Z_M into tilings A' + B_r = Z_{M/p_i}."""
    m = pair.modulus
    p = m.primes[i][0]
    A, B = pair.a, pair.b
    if any(a % p for a in A.support):
        raise NotApplicable(f"A is not contained in {p}Z_M")
    N = m.value // p
    Ared = from_set([a // p for a in A.support], N)
    classes: dict[int, list] = {}
    for b in B.support:
        classes.setdefault(b % p, []).append((b - b % p) // p)
    bcl = {r: from_set(sorted(v), N) for r, v in sorted(classes.items())}
    if len(bcl) != p:
        raise VerificationError("complement misses a residue class")
    pairs = {r: make_pair(Ared, Br) for r, Br in bcl.items()}
    return SubgroupReduction(i, Ared, bcl, pairs, tau_check(A, Ared, p))


# ---------------------------------------------------------------------------
# slabs


@dataclass
class SlabData:
    i: int
    slab: Multiset  # A_{p_i} on Z_M
    extension: Multiset  # S = A_{p_i} * F_i
    translates: dict  # k -> slab of A + k M_i, reduced to Z_{M/p_i}
    layers: list  # A_nu, nu = 0..p_i - 1

    @property
    def uniform(self) -> bool:
        sizes = {T.total for T in self.translates.values()}
        return len(sizes) == 1


def _slab(A: Multiset, i: int) -> Multiset:
    m = A.modulus
    p, n = m.primes[i]
    top = p ** (n - 1)
    keep = [a for a in A.support if m.pi(a, i) < top]
    return Multiset.from_weights(m, {a: int(A.weights[a]) for a in keep})


def slab_data(A: Multiset, i: int) -> SlabData:
    m = A.modulus
    p, n = m.primes[i]
    N = m.value // p
    sl = _slab(A, i)
    Fi = from_set(m.fiber(0, i), m)
    Mi = m.cofactors[i]
    trans = {k: _slab(A.translate(k * Mi), i).reduce_mod(N) for k in range(p**n)}
    top = p ** (n - 1)
    layers = []
    for nu in range(p):
        keep = [a for a in A.support if 0 <= m.pi(a, i) - nu * top < top]
        layers.append(Multiset.from_weights(m, {a: int(A.weights[a]) for a in keep}))
    return SlabData(i, sl, sl * Fi, trans, layers)


@dataclass
class SlabConditions:
    i: int
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    witness: dict = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        return self.cond_i == self.cond_ii == self.cond_iii

    @property
    def all(self) -> bool:
        return self.cond_i and self.cond_ii and self.cond_iii

    def to_json(self) -> dict:
        return {"i": self.i, "cond_i": self.cond_i, "cond_ii": self.cond_ii, "cond_iii": self.cond_iii, "witness": self.witness}


class ConditionsDisagree(RuntimeError):
    pass


def slab_applicable(pair: TilingPair, i: int) -> bool:
    p, n = pair.modulus.primes[i]
    return cy.divides(p**n, pair.a)


def slab_conditions(pair, i: int, strict: bool = True) -> SlabConditions:
    """Conditions (i)-(iii) of the slab criterion, each computed independently.

    ``pair`` is normally a TilingPair; a raw (A, B) tuple is accepted for probing
    non-tilings, where agreement is not enforced.
    """
    if isinstance(pair, TilingPair):
        A, B = pair.a, pair.b
    else:
        A, B = pair
        strict = False
    m = A.modulus
    p, n = m.primes[i]
    if not cy.divides(p**n, A):
        raise NotApplicable(f"Phi_{p**n} does not divide A")
    N = m.value // p
    wit: dict = {}

    # (i): every translate's slab tiles Z_{M/p} with B
    Bn = B.reduce_mod(N)
    c1 = True
    if not Bn.is_set():
        c1 = False
        wit["cond_i"] = {"reason": "B mod M/p is not a set"}
    else:
        for k, T in slab_data(A, i).translates.items():
            if not T.is_set() or not verify(T, Bn).tiles:
                c1 = False
                wit["cond_i"] = {"translate": k * m.cofactors[i]}
                break

    # (ii): Phi_d | A, or Phi_{d/p^j} | B for j = 1..n, for all p^n | d | M
    c2 = True
    for d in m.divisors():
        if d % p**n:
            continue
        if cy.divides(d, A):
            continue
        if all(cy.divides(d // p**j, B) if d // p**j > 1 else False for j in range(1, n + 1)):
            continue
        c2 = False
        wit["cond_ii"] = {"d": d}
        break

    # (iii): m in Div(A) => m/p not in Div(B), for p^n | m | M
    dA, dB = divisor_set(A).values, divisor_set(B).values
    c3 = True
    for d in sorted(dA):
        if d % p**n == 0 and d // p in dB:
            c3 = False
            wit["cond_iii"] = {"m": d}
            break

    rec = SlabConditions(i, c1, c2, c3, wit)
    if strict and not rec.agree:
        raise ConditionsDisagree(f"slab conditions disagree: {rec.to_json()}")
    return rec


@dataclass
class SlabReduction:
    i: int
    pair: TilingPair  # A_{p_i} + B = Z_{M/p_i}
    t2_reduced: bool
    t2_original: bool

    def to_json(self) -> dict:
        return {"kind": "slab", "i": self.i, "reduced": self.pair.to_json(), "t2_reduced": self.t2_reduced, "t2_original": self.t2_original}


def _t2_both(pair: TilingPair) -> bool:
    return cy.t2_check(pair.a) and cy.t2_check(pair.b)


def slab_reduce(pair: TilingPair, i: int) -> SlabReduction:
    cond = slab_conditions(pair, i)
    if not cond.all:
        raise NotApplicable(f"slab conditions fail in direction {i}: {cond.witness}")
    N = pair.M // pair.modulus.primes[i][0]
    red = make_pair(_slab(pair.a, i).reduce_mod(N), pair.b.reduce_mod(N))
    return SlabReduction(i, red, _t2_both(red), _t2_both(pair))


# ---------------------------------------------------------------------------
# driver


def shared_primes(pair: TilingPair) -> list[int]:
    return [p for p, _ in pair.modulus.primes if pair.a.total % p == 0 and pair.b.total % p == 0]


def is_base(pair: TilingPair) -> bool:
    return len(shared_primes(pair)) <= 2


@dataclass
class Node:
    pair: TilingPair
    step: str  # "base", "stuck", "tijdeman+subgroup", "subgroup", "slab"
    side: str = "A"
    i: int | None = None
    children: list = field(default_factory=list)

    @property
    def t2(self) -> bool | None:
        """T2 verdict implied by the tree (None when stuck somewhere below)."""
        if self.step == "base":
            return True
        if self.step == "stuck":
            return None
        vals = [c.t2 for c in self.children]
        if any(v is None for v in vals):
            return None
        return all(vals)

    def stuck_leaves(self):
        if self.step == "stuck":
            yield self.pair
        for c in self.children:
            yield from c.stuck_leaves()

    def to_json(self) -> dict:
        return {
            "modulus": self.pair.M,
            "a": list(self.pair.a.support),
            "b": list(self.pair.b.support),
            "step": self.step,
            "side": self.side,
            "i": self.i,
            "children": [c.to_json() for c in self.children],
        }


@dataclass
class InductionTrace:
    root: Node
    direct_t2: bool

    @property
    def verdict(self) -> bool | None:
        return self.root.t2

    @property
    def stuck(self) -> bool:
        return self.verdict is None

    @property
    def consistent(self) -> bool:
        return self.stuck or self.verdict == self.direct_t2

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "direct_t2": self.direct_t2, "consistent": self.consistent, "tree": self.root.to_json()}


def _orient(pair: TilingPair, side: str) -> TilingPair:
    return pair if side == "A" else pair.swap()


def _try(pair: TilingPair, strategy: str | None) -> Node | None:
    """One reduction step in the fixed order: Tijdeman, subgroup, slab; ascending primes; A then B."""
    m = pair.modulus
    kinds = ("tijdeman", "subgroup", "slab")
    only_i = None
    if strategy and strategy != "auto":
        kind, _, idx = strategy.partition(":")
        kinds = (kind,)
        only_i = int(idx) if idx else None
    for kind in kinds:
        for i, (p, n) in enumerate(m.primes):
            if only_i is not None and i != only_i:
                continue
            for side in ("A", "B"):
                q = _orient(pair, side)
                if kind == "tijdeman":
                    if q.a.total % p == 0:
                        continue
                    scaled = q if all(a % p == 0 for a in q.a.support) else make_pair(tijdeman_scale(q.a, p), q.b)
                    red = subgroup_reduce(scaled, i)
                    return Node(pair, "tijdeman+subgroup", side, i, [_orient(c, side) for c in red.pairs.values()])
                if kind == "subgroup":
                    if any(a % p for a in q.a.support):
                        continue
                    red = subgroup_reduce(q, i)
                    return Node(pair, "subgroup", side, i, [_orient(c, side) for c in red.pairs.values()])
                if kind == "slab":
                    if not slab_applicable(q, i):
                        continue
                    if not slab_conditions(q, i).all:
                        continue
                    red = slab_reduce(q, i)
                    return Node(pair, "slab", side, i, [_orient(red.pair, side)])
    return None


def _dedupe(pairs):
    seen, out = set(), []
    for P in pairs:
        key = (P.M, P.a.support, P.b.support)
        if key not in seen:
            seen.add(key)
            out.append(P)
    return out


def _drive(pair: TilingPair, strategy: str | None, depth: int) -> Node:
    if (strategy in (None, "auto") and is_base(pair)) or pair.a.total == 1 or pair.b.total == 1:
        return Node(pair, "base")
    node = _try(pair, strategy)
    if node is None:
        return Node(pair, "stuck")
    kids = _dedupe(node.children)
    node.children = [_drive(c, None, depth + 1) for c in kids]
    return node


def t2_induction_driver(pair: TilingPair, strategy: str = "auto") -> InductionTrace:
    root = _drive(pair, strategy, 0)
    return InductionTrace(root, _t2_both(pair))
