"""Seeded random corpora, standing fixtures, and the formula-vs-oracle suites."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .contraction import check_contraction_inequalities, kappa4
from .expansion import Realization, gradient_functionals, square_identity_check, square_identity_check_B
from .kernels import (ChaosCoefficients, SymmetricKernel, evaluate_series, normalize,
                      series_second_moment, gradient_second_moment)
from .oracle import GAUSSIAN, evaluate_literal, exact_kappa4, level2_eigen_kappa4, rademacher_expect

__all__ = [
    "random_kernel",
    "fixtures",
    "kappa_triple_suite",
    "identity_suite",
    "inequality_suite",
    "isometry_suite",
    "evaluation_suite",
    "rel_err",
]


def rel_err(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def random_kernel(rng: np.random.Generator, levels, J: int, density: float = 0.6,
                  normalized: bool = False) -> ChaosCoefficients:
    """Random sparse coefficients on ``{1..J}``; every listed level gets at least one entry."""
    out = {}
    for m in levels:
        keys = list(itertools.combinations(range(1, J + 1), m))
        if not keys:
            continue
        mask = rng.random(len(keys)) < density
        mask[rng.integers(len(keys))] = True
        vals = rng.standard_normal(len(keys))
        out[m] = SymmetricKernel(m, {k: float(v) for k, v, keep in zip(keys, vals, mask) if keep})
    c = ChaosCoefficients(out, max_level=max(levels))
    return normalize(c) if normalized else c


def fixtures() -> dict:
    """Named kernels with support at most 12."""
    a = 1.0 / math.sqrt(12.0)
    fx = {
        "complete23": ChaosCoefficients.from_entries({2: [((1, 2), a), ((1, 3), a), ((2, 3), a)]}),
        "pair": ChaosCoefficients.from_entries({2: [((1, 2), 1.0)]}),
        "unit1": ChaosCoefficients.from_entries({1: [((1,), 0.6), ((2,), 0.8)]}),
        "path2_6": ChaosCoefficients.from_entries(
            {2: [((i, i + 1), 1.0 / math.sqrt(20.0)) for i in range(1, 6)]}),
        "triple": ChaosCoefficients.from_entries({3: [((1, 2, 3), 1.0 / math.sqrt(36.0))]}),
        "mixed123": ChaosCoefficients.from_entries({
            1: [((1,), 0.3), ((4,), -0.2)],
            2: [((1, 2), 0.25), ((2, 3), -0.1), ((3, 4), 0.2)],
            3: [((1, 2, 4), 0.05), ((2, 3, 4), -0.08)]}),
    }
    rng = np.random.default_rng(20240607)
    for i in range(14):
        J = int(rng.integers(4, 13))
        levels = sorted(set(rng.choice([1, 2, 3], size=int(rng.integers(1, 4)))))
        fx[f"random{i:02d}"] = random_kernel(rng, levels, J, density=min(1.0, 8.0 / J), normalized=True)
    return fx


def kappa_triple_suite(n_cases: int = 200, seed: int = 1) -> dict:
    """Contraction vs Gaussian moment oracle (and eigenvalues at level 2) for single-level kernels."""
    rng = np.random.default_rng(seed)
    worst = {"contraction_vs_moment": 0.0, "contraction_vs_eigen": 0.0, "moment_vs_eigen": 0.0}
    for _ in range(n_cases):
        m = int(rng.integers(2, 4))
        J = int(rng.integers(m + 1, 7))
        c = random_kernel(rng, [m], J, density=float(rng.uniform(0.3, 1.0)))
        k_c = kappa4(c, m)
        k_m = exact_kappa4(c, GAUSSIAN)
        worst["contraction_vs_moment"] = max(worst["contraction_vs_moment"], rel_err(k_c, k_m))
        if m == 2:
            k_e = level2_eigen_kappa4(c.kernel(2))
            worst["contraction_vs_eigen"] = max(worst["contraction_vs_eigen"], rel_err(k_c, k_e))
            worst["moment_vs_eigen"] = max(worst["moment_vs_eigen"], rel_err(k_m, k_e))
    return {"cases": n_cases, "seed": seed, "max_rel_err": worst}


def _identity_err(lhs, rhs):
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def identity_suite(n_cases: int = 100, seed: int = 2, max_support: int = 5, max_level: int = 3) -> dict:
    """Pointwise square and gradient expansions on random ``(c, z, chi)``."""
    rng = np.random.default_rng(seed)
    worst = {"R1": 0.0, "Sr": 0.0, "Itilde2": 0.0, "Itilde1": 0.0}
    cases = []
    for i in range(n_cases):
        N = int(rng.integers(1, max_level + 1))
        J = int(rng.integers(N, max_support + 1))
        levels = sorted(set(rng.integers(1, N + 1, size=int(rng.integers(1, N + 1))).tolist()) | {N})
        c = random_kernel(rng, levels, J, density=float(rng.uniform(0.4, 1.0)))
        z = rng.standard_normal(J) * rng.choice([0.5, 1.0, 2.0])
        p = float(rng.uniform(0.1, 0.9))
        real = Realization(z, chi=(rng.random(J) < p).astype(float), chi_prob=p)
        errs = {"R1": _identity_err(*square_identity_check(c, z)),
                "Sr": _identity_err(*square_identity_check_B(c, z))}
        g = gradient_functionals(c, real)
        errs["Itilde2"] = abs(g.I - g.expansion) / (1.0 + abs(g.I))
        errs["Itilde1"] = abs(g.I_tilde - g.expansion_tilde) / (1.0 + abs(g.I))
        for k, v in errs.items():
            worst[k] = max(worst[k], float(v))
        cases.append({"case": i, "N": N, "J": J, **{k: float(v) for k, v in errs.items()}})
    return {"cases": n_cases, "seed": seed, "max_rel_err": worst, "per_case": cases}


def inequality_suite(n_instances: int = 1000, seed: int = 3, slack: float = 1e-12) -> dict:
    """Contraction/cumulant inequalities on random kernels with mixed levels."""
    rng = np.random.default_rng(seed)
    worst, nviol, nrec = -math.inf, 0, 0
    first = None
    for i in range(n_instances):
        J = int(rng.integers(2, 7))
        top = int(rng.integers(1, min(J, 4) + 1))
        levels = sorted(set(rng.integers(1, top + 1, size=int(rng.integers(1, 4))).tolist()))
        c = random_kernel(rng, levels, J, density=float(rng.uniform(0.2, 1.0)))
        if rng.random() < 0.5:
            c = normalize(c)
        rep = check_contraction_inequalities(c, slack)
        nrec += len(rep.records)
        worst = max(worst, rep.max_violation)
        if not rep.ok:
            nviol += len(rep.violations)
            first = first or {"instance": i, "violations": rep.violations}
    return {"instances": n_instances, "seed": seed, "records": nrec, "max_violation": worst,
            "violations": nviol, "first_violation": first, "slack": slack}


def isometry_suite(max_J: int = 12) -> dict:
    """``series_second_moment`` vs sign-vector enumeration of ``E[S^2]`` on the fixtures."""
    out = {}
    for name, c in fixtures().items():
        J = c.support_bound
        if J > max_J:
            continue
        brute = rademacher_expect(c, J, lambda s: s * s)
        out[name] = {"formula": series_second_moment(c), "enumeration": brute,
                     "abs_err": abs(series_second_moment(c) - brute),
                     "gradient_mean": gradient_second_moment(c)}
    return out


def evaluation_suite(n_cases: int = 50, seed: int = 4) -> float:
    """Max relative gap between the stored-key evaluation and full permutation evaluation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        J = int(rng.integers(3, 7))
        c = random_kernel(rng, [1, 2, 3], J)
        z = rng.standard_normal(J)
        worst = max(worst, rel_err(evaluate_series(c, z), evaluate_literal(c, z)))
    return worst
