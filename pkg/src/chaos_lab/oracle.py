"""Brute-force ground truth used to check the formula modules.

Nothing here shares code with the contraction formulas: moments of ``S`` are
obtained either by expanding ``S^p`` into monomials and factorizing the
expectation over independent coordinates, or by enumerating every sign vector.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import TooLarge
from .kernels import ChaosCoefficients, SymmetricKernel, evaluate_batch, factorial, symmetric_value

__all__ = [
    "MomentTable",
    "gaussian_moment",
    "GAUSSIAN",
    "RADEMACHER",
    "exact_power_moment",
    "exact_kappa4",
    "rademacher_expect",
    "level2_eigen_kappa4",
    "full_level_sum_squares",
    "evaluate_literal",
]


def gaussian_moment(k: int) -> float:
    """``E[G^k]`` for a standard normal ``G``: ``(k-1)!!`` for even ``k``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k % 2:
        return 0.0
    return float(math.prod(range(k - 1, 0, -2)))


@dataclass(frozen=True)
class MomentTable:
    name: str
    mu: Callable[[int], float]

    def __call__(self, k: int) -> float:
        return self.mu(k)

    def table(self, kmax: int) -> np.ndarray:
        return np.array([self.mu(k) for k in range(kmax + 1)], dtype=float)


GAUSSIAN = MomentTable("gaussian", gaussian_moment)
RADEMACHER = MomentTable("rademacher", lambda k: 0.0 if k % 2 else 1.0)


def _monomials(c: ChaosCoefficients, J: int):
    """Exponent matrix and weights of ``S`` written as a sum of monomials."""
    rows, coefs = [], []
    for m, k in c.levels.items():
        w = factorial(m)
        for key, v in k.entries.items():
            e = np.zeros(J, dtype=np.int64)
            e[np.array(key) - 1] = 1
            rows.append(e)
            coefs.append(w * v)
    if not rows:
        return np.zeros((0, J), dtype=np.int64), np.zeros(0)
    return np.array(rows), np.array(coefs)


def _poly_mul(E1, c1, E2, c2):
    E = (E1[:, None, :] + E2[None, :, :]).reshape(-1, E1.shape[1])
    c = (c1[:, None] * c2[None, :]).ravel()
    uniq, inv = np.unique(E, axis=0, return_inverse=True)
    return uniq, np.bincount(inv.ravel(), weights=c, minlength=len(uniq))


def _expect(E, coef, mu_table):
    if len(coef) == 0:
        return 0.0
    return float(np.dot(coef, np.prod(mu_table[E], axis=1)))


def exact_power_moment(c: ChaosCoefficients, moments: MomentTable, p: int,
                       limit: float = 1e7) -> float:
    """``E[S(c, Z)^p]`` for ``p <= 4`` with i.i.d. coordinates of the given moments."""
    if p not in (1, 2, 3, 4):
        raise ValueError("p must be 1, 2, 3 or 4")
    s = c.nnz
    if s ** p > limit:
        raise TooLarge(f"{s} stored entries: s^{p} = {s ** p:.3g} exceeds {limit:.3g}")
    J = max(c.support_bound, 1)
    E, w = _monomials(c, J)
    mu = moments.table(p)
    if p == 1:
        return _expect(E, w, mu)
    E2, w2 = _poly_mul(E, w, E, w)
    if p == 2:
        return _expect(E2, w2, mu)
    if p == 3:
        E3, w3 = _poly_mul(E2, w2, E, w)
        return _expect(E3, w3, mu)
    # E[S^4] = sum_{u, v in S^2} w_u w_v E[z^(u+v)], chunked over u
    total = 0.0
    step = max(1, int(4e6 // max(1, len(w2) * J)))
    for s0 in range(0, len(w2), step):
        Eu = E2[s0:s0 + step]
        prod = np.prod(mu[Eu[:, None, :] + E2[None, :, :]], axis=2)
        total += float(w2[s0:s0 + step] @ prod @ w2)
    return total


def exact_kappa4(c: ChaosCoefficients, moments: MomentTable = GAUSSIAN) -> float:
    m2 = exact_power_moment(c, moments, 2)
    return exact_power_moment(c, moments, 4) - 3.0 * m2 * m2


def rademacher_expect(c: ChaosCoefficients, J: int, f: Callable = lambda s: s) -> float:
    """``E[f(S(c, sigma))]`` averaged over all ``2^J`` sign vectors."""
    if J > 20:
        raise TooLarge(f"2^{J} sign vectors is beyond the enumeration limit (J <= 20)")
    signs = 1.0 - 2.0 * ((np.arange(2 ** J)[:, None] >> np.arange(J)[None, :]) & 1)
    vals = evaluate_batch(c, signs)
    return float(np.mean(f(vals)))


def level2_eigen_kappa4(k: SymmetricKernel) -> float:
    """Fourth cumulant of a Gaussian quadratic form: ``48 * sum(lambda^4)``."""
    if k.level != 2:
        raise ValueError("level-2 kernel required")
    J = k.support_bound
    if J > 500:
        raise TooLarge("support bound above 500")
    if J == 0:
        return 0.0
    A = np.zeros((J, J))
    for (i, j), v in k.entries.items():
        A[i - 1, j - 1] = A[j - 1, i - 1] = v
    lam = np.linalg.eigvalsh(A)
    return 48.0 * float(np.sum(lam ** 4))


def full_level_sum_squares(k: SymmetricKernel, J: int | None = None) -> float:
    """Sum of ``c(alpha)^2`` over every ordered tuple in ``{1..J}^m``."""
    J = J or k.support_bound
    return sum(symmetric_value(k, a) ** 2
               for a in itertools.product(range(1, J + 1), repeat=k.level))


def evaluate_literal(c: ChaosCoefficients, z) -> float:
    """``S(c, z)`` summing over every ordered multi-index (no symmetry shortcut)."""
    z = np.asarray(z, dtype=float)
    J = len(z)
    total = 0.0
    for m, k in c.levels.items():
        for a in itertools.product(range(1, J + 1), repeat=m):
            v = symmetric_value(k, a)
            if v:
                total += v * float(np.prod(z[np.array(a) - 1]))
    return total
