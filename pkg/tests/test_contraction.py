import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaos_lab.contraction import (BlockKernel, check_contraction_inequalities, contract, kappa4,
                                   kappa_bar, symmetrize, symmetrize_literal)
from chaos_lab.errors import BadContractionOrder
from chaos_lab.kernels import ChaosCoefficients, level_norm, make_kernel
from chaos_lab.suites import random_kernel

A = 1.0 / math.sqrt(12.0)


def test_contract_outer_product():
    f = make_kernel(1, [((1,), 0.3)])
    g = make_kernel(1, [((2,), -2.0)])
    k = contract(f, g, 0)
    assert k.block_sizes == (1, 1)
    assert k.value((1,), (2,)) == pytest.approx(-0.6)


def test_contract_full_level1():
    f = make_kernel(1, [((1,), 0.3), ((3,), 0.4)])
    k = contract(f, f, 1)
    assert k.block_sizes == (0, 0)
    assert k.value((), ()) == pytest.approx(0.25)


def test_contract_complete23():
    f = make_kernel(2, [((1, 2), A), ((1, 3), A), ((2, 3), A)])
    k = contract(f, f, 1)
    for i in range(1, 4):
        assert k.value((i,), (i,)) == pytest.approx(2 * A * A)
        for j in range(1, 4):
            if j != i:
                assert k.value((i,), (j,)) == pytest.approx(A * A)


def test_contract_bad_order():
    f = make_kernel(2, [((1, 2), 1.0)])
    with pytest.raises(BadContractionOrder):
        contract(f, f, 3)


def test_contract_brute_force(rng):
    import itertools
    from chaos_lab.kernels import symmetric_value
    for _ in range(20):
        m, n = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        J = 5
        f = random_kernel(rng, [m], J).kernel(m)
        g = random_kernel(rng, [n], J).kernel(n)
        r = int(rng.integers(0, min(m, n) + 1))
        k = contract(f, g, r)
        idx = range(1, J + 1)
        for a in itertools.product(idx, repeat=m - r):
            for b in itertools.product(idx, repeat=n - r):
                s = sum(symmetric_value(f, a + gm) * symmetric_value(g, b + gm)
                        for gm in itertools.product(idx, repeat=r))
                assert k.value(a, b) == pytest.approx(s, abs=1e-13)


def test_symmetrize_examples(rng):
    k = BlockKernel(1, 1, {((1,), (2,)): 1.0})
    assert symmetrize(k).value((1, 2)) == pytest.approx(0.5)
    f = make_kernel(2, [((1, 2), A), ((1, 3), A), ((2, 3), A)])
    c = contract(f, f, 1)
    s = symmetrize(c)
    for (a, b), v in c.entries.items():
        assert s.value(a + b) == pytest.approx(v)
    for _ in range(30):
        m, n = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        f = random_kernel(rng, [m], 5).kernel(m)
        g = random_kernel(rng, [n], 5).kernel(n)
        r = int(rng.integers(0, min(m, n) + 1))
        k = contract(f, g, r)
        fast, lit = symmetrize(k), symmetrize_literal(k)
        assert set(fast.entries) == set(lit.entries)
        for key, v in lit.entries.items():
            assert fast.entries[key] == pytest.approx(v, abs=1e-13)
        assert fast.norm() <= k.norm() * (1 + 1e-12) + 1e-15


def test_kappa4_examples(pair, complete23):
    c1 = ChaosCoefficients.from_entries({1: [((1,), 0.6), ((2,), 0.8)]})
    assert kappa4(c1, 1) == 0.0
    assert kappa_bar(c1) == 0.0
    assert kappa4(pair, 2) == pytest.approx(96.0)
    assert kappa4(complete23, 2) == pytest.approx(6.0, rel=1e-12)
    assert kappa_bar(complete23) == pytest.approx(6 ** 0.25, rel=1e-12)
    assert kappa4(complete23, 3) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.1, 5.0))
def test_kappa4_homogeneous_nonnegative(seed, t):
    c = random_kernel(np.random.default_rng(seed), [2, 3], 5)
    for m in (2, 3):
        k = kappa4(c, m)
        assert k >= 0
        assert kappa4(c.scaled(t), m) == pytest.approx(t ** 4 * k, rel=1e-10, abs=1e-14)
        assert kappa4(c.scaled(-1.0), m) == pytest.approx(k, rel=1e-12, abs=1e-15)


def test_inequalities_zero_and_complete(complete23):
    rep = check_contraction_inequalities(ChaosCoefficients({}, 3))
    assert rep.ok
    rep = check_contraction_inequalities(complete23)
    assert rep.ok
    acc10 = [r for r in rep.records if r["name"] == "acc10"]
    assert acc10[0]["lhs"] == pytest.approx(1 / math.sqrt(6))
    assert acc10[0]["lhs"] <= acc10[0]["rhs"]


def test_inequalities_random(rng):
    for _ in range(60):
        c = random_kernel(rng, sorted(set(rng.integers(1, 4, size=2).tolist())), 6)
        rep = check_contraction_inequalities(c)
        assert rep.ok, rep.violations
        names = {r["name"] for r in rep.records}
        assert "acc8" in names


def test_influence_bounded_by_level_norm(complete23):
    assert level_norm(complete23, 2) == pytest.approx(math.sqrt(0.5))
