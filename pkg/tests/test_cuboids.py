from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tests.conftest import random_multiset
from tilekit import cuboids as cb
from tilekit import cyclotomic as cy
from tilekit.fibers import standard_fiber
from tilekit.multiset import Multiset, from_set
from tilekit.zmod import factor


@pytest.mark.parametrize("N", [12, 18, 20, 30])
def test_classic_nullity_random(N, rng):
    ct = cb.classic_type(N, N)
    for _ in range(150):
        A = random_multiset(rng, N, k=rng.randint(1, 8))
        assert cb.is_null(A, ct, method="enumerate") == cy.divides(N, A)


@pytest.mark.parametrize("N", [12, 30])
def test_fiber_sums_are_null(N):
    m = factor(N)
    ct = cb.classic_type(N, N)
    for i, (p, _) in enumerate(m.primes):
        F = from_set(m.fiber(0, i), m)
        assert cb.is_null(F, ct, method="enumerate")
        assert cb.is_null(F.translate(5) - F.translate(1), ct, method="enumerate")


def test_cuboid_evaluation_matches_vertex_sum():
    A = from_set([0, 1, 3, 4], 12)
    ct = cb.classic_type(12, 12)
    cub = cb.Cuboid(1, {0: 6, 1: 4})
    direct = sum(s * int(A.weights[x]) for x, s in cub.vertices(12))
    assert cb.evaluate(A, ct, cub) == direct
    with pytest.raises(ValueError):
        cb.evaluate(A, ct, cb.Cuboid(0, {0: 3, 1: 4}))


def _fiber_combination(rng, m, N):
    """Random integer combination of N-scale standard fibers (all divisible by Phi_N) plus noise."""
    W = Multiset.zero(m)
    for i, (p, n) in enumerate(m.primes):
        if N % p:
            continue
        F = standard_fiber(N, p, m.exponent(N, i), m)
        for _ in range(2):
            W = W + F.translate(rng.randrange(m.value)).scale(rng.choice([-1, 1]))
    if rng.random() < 0.5:
        W = W + Multiset.from_weights(m, {rng.randrange(m.value): 1})
    return W


@pytest.mark.parametrize("M", [36, 72, 180])
def test_folding_three_way(M, rng):
    m = factor(M)
    for N in m.divisors():
        if N < 2:
            continue
        for _ in range(6):
            A = _fiber_combination(rng, m, N)
            d = cy.divides(N, A)
            assert cb.cyclotomic_via_cuboids(A, N) == d
            assert cb.grid_restricted_divides(A, N) == d


def test_folding_shortcut_recognised():
    ct = cb.folding_type(72, 12)
    assert cb._folding_target(ct) == 12
    A = from_set([0, 6], 72)
    assert cb.is_null(A, ct) == cb.is_null(A, ct, method="enumerate") == cy.divides(12, A)


@pytest.mark.parametrize("M", [36, 72, 108])
def test_presets(M, rng):
    m = factor(M)
    for i, (p, n) in enumerate(m.primes):
        for _ in range(15):
            A = random_multiset(rng, M, k=rng.randint(1, 6))
            if rng.random() < 0.5:
                A = A * from_set(m.fiber(0, i), m)
            if n >= 2:
                assert cb.preset_null_check(A, "ex1", i)
                assert cb.preset_null_check(A, "ex1-fold", i)
                assert cb.preset_null_check(A, "ex3", i)
            for alpha in range(1, n + 1):
                assert cb.preset_null_check(A, "ex2", i, alpha)


def test_matrices_shapes():
    assert cb.classic_cuboid_matrix(20).shape == (40, 20)
    R = cb.remainder_matrix(12)
    assert R.shape == (12, 4)
    # X^k mod Phi_12 for k < 4 is X^k itself
    assert (R[:4] == np.eye(4, dtype=int)).all()


def test_type_validation():
    m = factor(12)
    with pytest.raises(ValueError):
        cb.CuboidType(12, (3, 1), from_set([0], 12), m)
    with pytest.raises(ValueError):
        cb.CuboidType(5, (0, 0), from_set([0], 5), m)
    with pytest.raises(ValueError):
        cb.multiscale_preset("nope", 36, 0)
