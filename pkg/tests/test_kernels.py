import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaos_lab.errors import BadLevel, DuplicateKey, RepeatedIndex, SupportMismatch, ZeroKernel
from chaos_lab.kernels import (ChaosCoefficients, derivative, eps0, evaluate_batch, evaluate_series,
                               gradient_second_moment, influence, influence_profile, level_norm,
                               make_kernel, min_active_level_norm, normalize, series_second_moment,
                               symmetric_value, truncate, weighted_norm)
from chaos_lab.oracle import evaluate_literal, full_level_sum_squares, rademacher_expect
from chaos_lab.suites import random_kernel

A = 1.0 / math.sqrt(12.0)


def test_make_kernel_canonicalizes():
    k1 = make_kernel(2, [((1, 2), 0.5)])
    k2 = make_kernel(2, [((2, 1), 0.5)])
    assert k1 == k2 and k1.entries == {(1, 2): 0.5}


@pytest.mark.parametrize("entries,err", [
    ([((1, 1), 0.5)], RepeatedIndex),
    ([((1, 2), 0.5), ((2, 1), 0.1)], DuplicateKey),
    ([((1, 2, 3), 0.5)], BadLevel),
])
def test_make_kernel_rejects(entries, err):
    with pytest.raises(err):
        make_kernel(2, entries)


def test_symmetric_value():
    k = make_kernel(2, [((1, 2), 0.7)])
    assert symmetric_value(k, (2, 1)) == 0.7
    assert symmetric_value(k, (1, 1)) == 0.0
    assert symmetric_value(k, (1, 3)) == 0.0
    with pytest.raises(BadLevel):
        symmetric_value(k, (1,))


def test_level_norms(complete23):
    c1 = ChaosCoefficients.from_entries({1: [((1,), 2 ** -0.5), ((2,), 2 ** -0.5)]})
    assert level_norm(c1, 1) == pytest.approx(1.0, abs=1e-15)
    assert series_second_moment(c1) == pytest.approx(1.0, abs=1e-15)
    assert level_norm(complete23, 2) == pytest.approx(math.sqrt(6 * A * A), abs=1e-15)
    assert level_norm(complete23, 1) == 0.0
    assert series_second_moment(complete23) == pytest.approx(1.0, abs=1e-12)


def test_normalize(pair, complete23):
    # i_N of the single pair is 2! * |c|_2^2 = 2! * 2! * 1 = 4
    n = normalize(pair)
    assert n.kernel(2).entries[(1, 2)] == pytest.approx(0.5)
    assert series_second_moment(n) == pytest.approx(1.0, abs=1e-12)
    again = normalize(complete23)
    assert again.kernel(2).entries[(1, 2)] == pytest.approx(A, abs=1e-12)
    with pytest.raises(ZeroKernel):
        normalize(ChaosCoefficients({}, 2))


def test_weighted_norm(complete23, rng):
    for _ in range(20):
        c = random_kernel(rng, [1, 2, 3], 5)
        assert weighted_norm(c, 0, 1.0) ** 2 == pytest.approx(series_second_moment(c), rel=1e-12)
    unit = ChaosCoefficients.from_entries({1: [((1,), 1.0)]})
    for M in (0.3, 1.0, 7.0):
        assert weighted_norm(unit, 1, M) == pytest.approx(1.0)
    assert weighted_norm(complete23, 3, 2.0) == 0.0


def test_influence(complete23):
    assert influence(complete23, 2) == pytest.approx(1 / math.sqrt(6), abs=1e-12)
    pair = ChaosCoefficients.from_entries({2: [((1, 2), -0.3)]})
    assert influence(pair, 2) == pytest.approx(0.3)
    c1 = ChaosCoefficients.from_entries({1: [((1,), 0.3), ((2,), -0.9)]})
    assert influence(c1, 1) == pytest.approx(0.9)
    assert influence_profile(complete23) == pytest.approx(1 / math.sqrt(6))
    assert influence_profile(complete23, weighted=True) == pytest.approx(2 / math.sqrt(6))
    assert influence_profile(ChaosCoefficients({}, 3)) == 0.0


def test_influence_brute_force(rng):
    for _ in range(30):
        c = random_kernel(rng, [2, 3], 5)
        for m, k in c.levels.items():
            J = k.support_bound
            best = 0.0
            for i in range(1, J + 1):
                s = sum(symmetric_value(k, (i,) + a) ** 2
                        for a in itertools.product(range(1, J + 1), repeat=m - 1))
                best = max(best, math.sqrt(s))
            assert influence(c, m) == pytest.approx(best, rel=1e-12)
            assert influence(c, m) <= level_norm(c, m) + 1e-15


def test_eps0(rng):
    a = -0.4
    pair = ChaosCoefficients.from_entries({2: [((1, 2), a)]})
    for M in (0.5, 1.0, 3.0):
        assert eps0(pair, M)[0] == pytest.approx(M * abs(a))
    assert eps0(ChaosCoefficients({}, 2), 1.0) == (0.0, 0.0)
    for _ in range(50):
        c = random_kernel(rng, [1, 2, 3], 6)
        M = float(rng.uniform(1.0, 4.0))
        val, bound = eps0(c, M)
        assert val <= bound * (1 + 1e-12)


def test_min_active_level_norm():
    c = ChaosCoefficients.from_entries({1: [((1,), 0.5)], 2: [((1, 2), 0.8 / math.sqrt(2))]})
    assert min_active_level_norm(c) == pytest.approx(0.5)
    c2 = ChaosCoefficients.from_entries({2: [((1, 2), 0.8 / math.sqrt(2))]}, max_level=2)
    assert min_active_level_norm(c2) == pytest.approx(0.8)
    assert min_active_level_norm(ChaosCoefficients({}, 2)) == math.inf


def test_truncate(complete23):
    t = truncate(complete23, 2)
    assert dict(t.kernel(2).entries) == {(1, 2): A}
    assert truncate(complete23, 5) == complete23
    assert series_second_moment(complete23) - series_second_moment(t) >= 0
    assert truncate(t, 2) == t


def test_derivative(rng):
    c1 = ChaosCoefficients.from_entries({1: [((1,), 0.3), ((2,), -0.2)]})
    d = derivative(c1, 1)
    assert d.constant == 0.3 and d.coefficients.is_zero()
    a = 0.7
    d = derivative(ChaosCoefficients.from_entries({2: [((1, 2), a)]}), 1)
    assert d.constant == 0.0 and dict(d.coefficients.kernel(1).entries) == {(2,): 2 * a}
    for _ in range(100):
        J = int(rng.integers(2, 7))
        c = random_kernel(rng, [1, 2, 3], J)
        z = rng.standard_normal(J)
        j = int(rng.integers(1, J + 1))
        h = float(rng.uniform(0.1, 2.0))
        zh = z.copy()
        zh[j - 1] += h
        fd = (evaluate_series(c, zh) - evaluate_series(c, z)) / h
        assert derivative(c, j)(z) == pytest.approx(fd, rel=1e-9, abs=1e-12)


def test_gradient_second_moment(rng):
    unit = ChaosCoefficients.from_entries({1: [((1,), 1.0)]})
    assert gradient_second_moment(unit) == 1.0
    a = 0.3
    assert gradient_second_moment(ChaosCoefficients.from_entries({2: [((1, 2), a)]})) == pytest.approx(8 * a * a)
    for _ in range(10):
        J = int(rng.integers(2, 9))
        c = random_kernel(rng, [1, 2, 3], J)
        grads = [derivative(c, j) for j in range(1, J + 1)]
        signs = 1.0 - 2.0 * ((np.arange(2 ** J)[:, None] >> np.arange(J)) & 1)
        brute = np.mean([sum(g(s) ** 2 for g in grads) for s in signs])
        assert brute == pytest.approx(gradient_second_moment(c), rel=1e-12)


def test_evaluate_series():
    c1 = ChaosCoefficients.from_entries({1: [((1,), 0.25), ((2,), 0.5)]})
    assert evaluate_series(c1, [1.0, 1.0]) == 0.75
    a = 0.3
    pair = ChaosCoefficients.from_entries({2: [((1, 2), a)]})
    assert evaluate_series(pair, [2.0, 3.0]) == pytest.approx(12 * a)
    with pytest.raises(SupportMismatch):
        evaluate_series(pair, [1.0])


def test_evaluate_vs_literal_and_batch(rng):
    for _ in range(30):
        J = int(rng.integers(3, 7))
        c = random_kernel(rng, [1, 2, 3, 4][: int(rng.integers(1, 5))], J)
        Z = rng.standard_normal((7, J))
        batch = evaluate_batch(c, Z)
        for row, b in zip(Z, batch):
            lit = evaluate_literal(c, row)
            assert evaluate_series(c, row) == pytest.approx(lit, rel=1e-12, abs=1e-12)
            assert b == pytest.approx(lit, rel=1e-12, abs=1e-12)


def test_level_norm_by_enumeration(rng):
    for _ in range(20):
        c = random_kernel(rng, [1, 2, 3], 6)
        for m, k in c.levels.items():
            assert full_level_sum_squares(k) == pytest.approx(level_norm(c, m) ** 2, rel=1e-12)


def test_isometry_rademacher(rng):
    for _ in range(10):
        J = int(rng.integers(2, 11))
        c = random_kernel(rng, [1, 2, 3], J)
        assert rademacher_expect(c, J, np.square) == pytest.approx(series_second_moment(c), abs=1e-12 * (1 + series_second_moment(c)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.1, 10.0))
def test_normalize_idempotent_and_scale_free(seed, t):
    c = random_kernel(np.random.default_rng(seed), [1, 2, 3], 5)
    n = normalize(c)
    assert series_second_moment(n) == pytest.approx(1.0, abs=1e-12)
    nn = normalize(n)
    for m in n.levels:
        for key, v in n.kernel(m).entries.items():
            assert nn.kernel(m).entries[key] == pytest.approx(v, abs=1e-12)
    ns = normalize(c.scaled(t))
    for m in n.levels:
        for key, v in n.kernel(m).entries.items():
            assert ns.kernel(m).entries[key] == pytest.approx(v, abs=1e-12)
