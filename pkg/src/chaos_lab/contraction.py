"""Contractions of symmetric kernels, their symmetrizations, and fourth cumulants.

Block kernels are keyed by pairs of sorted multisets; a key stands for every
ordering within each block, so norms weight each stored value by the number of
distinct orderings of both blocks.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .errors import BadContractionOrder
from .kernels import ChaosCoefficients, SymmetricKernel, factorial, level_norm, influence

__all__ = [
    "BlockKernel",
    "FullSymmetricKernel",
    "contract",
    "symmetrize",
    "symmetrize_literal",
    "kappa4",
    "kappa_bar",
    "check_contraction_inequalities",
    "InequalityReport",
]


def multiset_multiplicity(key: tuple) -> int:
    """Number of distinct orderings of the multiset ``key``."""
    out = math.factorial(len(key))
    for n in Counter(key).values():
        out //= math.factorial(n)
    return out


@dataclass(frozen=True)
class BlockKernel:
    """Kernel on ``N^p x N^q``, symmetric within each block."""

    p: int
    q: int
    entries: dict = field(default_factory=dict)

    @property
    def block_sizes(self):
        return (self.p, self.q)

    def value(self, left, right) -> float:
        return self.entries.get((tuple(sorted(left)), tuple(sorted(right))), 0.0)

    def frobenius2(self) -> float:
        return sum(multiset_multiplicity(a) * multiset_multiplicity(b) * v * v
                   for (a, b), v in self.entries.items())

    def norm(self) -> float:
        return math.sqrt(self.frobenius2())

    def swapped(self) -> "BlockKernel":
        return BlockKernel(self.q, self.p, {(b, a): v for (a, b), v in self.entries.items()})


@dataclass(frozen=True)
class FullSymmetricKernel:
    """Fully symmetric kernel of a given order keyed by sorted multisets."""

    order: int
    entries: dict = field(default_factory=dict)

    def value(self, index) -> float:
        return self.entries.get(tuple(sorted(index)), 0.0)

    def frobenius2(self) -> float:
        return sum(multiset_multiplicity(k) * v * v for k, v in self.entries.items())

    def norm(self) -> float:
        return math.sqrt(self.frobenius2())


def _subset_index(k: SymmetricKernel, r: int) -> dict:
    """r-subset gamma -> list of (key minus gamma, value)."""
    index = defaultdict(list)
    for key, v in k.entries.items():
        for pos in itertools.combinations(range(k.level), r):
            gamma = tuple(key[i] for i in pos)
            rest = tuple(key[i] for i in range(k.level) if i not in pos)
            index[gamma].append((rest, v))
    return index


def contract(f: SymmetricKernel, g: SymmetricKernel, r: int) -> BlockKernel:
    """``(f (x)_r g)(alpha, beta) = sum_{gamma in N^r} f(alpha, gamma) g(beta, gamma)``."""
    m, n = f.level, g.level
    if not 0 <= r <= min(m, n):
        raise BadContractionOrder(f"contraction order {r} outside [0, {min(m, n)}]")
    fi = _subset_index(f, r)
    gi = _subset_index(g, r) if g is not f else fi
    w = float(math.factorial(r))
    out = defaultdict(float)
    for gamma, left in fi.items():
        right = gi.get(gamma)
        if not right:
            continue
        for a, fv in left:
            for b, gv in right:
                out[(a, b)] += w * fv * gv
    return BlockKernel(m - r, n - r, dict(out))


def symmetrize(k: BlockKernel) -> FullSymmetricKernel:
    """Average of a block kernel over all slot permutations.

    Every stored ``(A, B)`` feeds exactly one multiset ``A + B``; the share of
    permutations that put the sub-multiset ``A`` in the first block is
    ``prod_i C(n_i, a_i) / C(p + q, p)``.
    """
    p, q = k.p, k.q
    total = math.comb(p + q, p)
    out = defaultdict(float)
    for (a, b), v in k.entries.items():
        eta = tuple(sorted(a + b))
        counts, ca = Counter(eta), Counter(a)
        w = 1
        for i, ai in ca.items():
            w *= math.comb(counts[i], ai)
        out[eta] += w / total * v
    return FullSymmetricKernel(p + q, dict(out))


def symmetrize_literal(k: BlockKernel) -> FullSymmetricKernel:
    """Reference symmetrization by enumerating all ``(p+q)!`` permutations."""
    p, q = k.p, k.q
    etas = {tuple(sorted(a + b)) for a, b in k.entries}
    nperm = math.factorial(p + q)
    out = {}
    for eta in etas:
        s = 0.0
        for perm in itertools.permutations(eta):
            s += k.value(perm[:p], perm[p:])
        out[eta] = s / nperm
    return FullSymmetricKernel(p + q, out)


class _ContractionCache:
    """Per-coefficient memo of contractions and their norms."""

    def __init__(self, c: ChaosCoefficients):
        self.c = c
        self._raw = {}
        self._sym = {}

    def raw(self, m, n, r) -> BlockKernel:
        key = (m, n, r)
        if key not in self._raw:
            self._raw[key] = contract(self.c.kernel(m), self.c.kernel(n), r)
        return self._raw[key]

    def raw_norm2(self, m, n, r) -> float:
        return self.raw(m, n, r).frobenius2()

    def sym_norm2(self, m, n, r) -> float:
        key = (m, n, r)
        if key not in self._sym:
            self._sym[key] = symmetrize(self.raw(m, n, r)).frobenius2()
        return self._sym[key]


def _kappa4(cache: _ContractionCache, m: int) -> float:
    if m < 2 or m not in cache.c.levels:
        return 0.0
    mf = factorial(m)
    total = 0.0
    for r in range(1, m):
        total += mf ** 2 * math.comb(m, r) ** 2 * (
            cache.raw_norm2(m, m, r) + math.comb(2 * m - 2 * r, m - r) * cache.sym_norm2(m, m, r))
    return total


def kappa4(c: ChaosCoefficients, m: int) -> float:
    """Fourth cumulant of the level-``m`` chaos under i.i.d. standard normal inputs."""
    if m < 1:
        raise ValueError("level must be >= 1")
    return _kappa4(_ContractionCache(c), m)


def kappa_bar(c: ChaosCoefficients) -> float:
    """Sum over levels of ``kappa4 ** (1/4)``."""
    cache = _ContractionCache(c)
    return sum(_kappa4(cache, m) ** 0.25 for m in range(1, c.max_level + 1))


@dataclass
class InequalityReport:
    records: list
    max_violation: float
    slack: float

    @property
    def violations(self):
        return [r for r in self.records if r["violation"] > self.slack]

    @property
    def ok(self) -> bool:
        return not self.violations


def _record(name, m, n, r, lhs, rhs, note=None):
    scale = max(1.0, abs(lhs), abs(rhs))
    rec = {"name": name, "m": m, "n": n, "r": r, "lhs": lhs, "rhs": rhs,
           "violation": (lhs - rhs) / scale}
    if note:
        rec["note"] = note
    return rec


def check_contraction_inequalities(c: ChaosCoefficients, slack: float = 1e-12) -> InequalityReport:
    """Evaluate both sides of the contraction/cumulant inequality suite.

    The mixed-level full-contraction bound is evaluated in its homogeneous
    form ``||c_m (x)_m c_n|| <= |c|_m * (sqrt(kappa_n) / (n! C(n, n-m)))^(1/2)``.
    """
    cache = _ContractionCache(c)
    kap = {m: _kappa4(cache, m) for m in c.levels}
    levels = list(c.levels)
    recs = []

    def kbound(m, r):
        return math.sqrt(kap[m]) / (factorial(m) * math.comb(m, r))

    for i, m in enumerate(levels):
        for n in levels[i:]:
            for r in range(0, min(m, n) + 1):
                sym2 = cache.sym_norm2(m, n, r)
                raw2 = cache.raw_norm2(m, n, r)
                fm = cache.raw_norm2(m, m, m - r)
                gn = cache.raw_norm2(n, n, n - r)
                recs.append(_record("acc8-1", m, n, r, sym2, 0.5 * (fm + gn)))
                recs.append(_record("acc8", m, n, r, raw2, math.sqrt(fm) * math.sqrt(gn)))
                if 0 < r < min(m, n):
                    bound = max(kbound(m, r), kbound(n, r))
                    recs.append(_record("acc9-sym", m, n, r, math.sqrt(sym2), bound))
                    recs.append(_record("acc9", m, n, r, math.sqrt(raw2), bound))
            if m < n:
                lhs = math.sqrt(cache.raw_norm2(m, n, m))
                rhs = level_norm(c, m) * math.sqrt(math.sqrt(kap[n]) / (factorial(n) * math.comb(n, n - m)))
                recs.append(_record("acc9-1", m, n, m, lhs, rhs))
    for m in levels:
        if m < 2:
            continue
        norm = level_norm(c, m)
        if norm == 0.0:
            recs.append(_record("acc10", m, m, m - 1, 0.0, 0.0, note="vacuous"))
            continue
        recs.append(_record("acc10", m, m, m - 1, influence(c, m),
                            math.sqrt(kap[m]) / (factorial(m) * m * norm)))
    worst = max((r["violation"] for r in recs), default=0.0)
    return InequalityReport(recs, worst, slack)
