"""Sparse symmetric chaos coefficients and the scalar diagnostics built on them.

A coefficient family ``c`` is stored level by level.  Each level ``m`` keeps one
value per strictly increasing multi-index; the value is ``c(alpha)`` itself and
every sum over the full (ordered) index set ``N^m`` applies the ``m!``
multiplicity analytically.  Indices are 1-based.
"""
from __future__ import annotations

import math
from collections import defaultdict
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import BadLevel, DuplicateKey, RepeatedIndex, SupportMismatch, ZeroKernel

__all__ = [
    "SymmetricKernel",
    "ChaosCoefficients",
    "AffineChaos",
    "make_kernel",
    "canonical_index",
    "symmetric_value",
    "factorial",
    "level_norm",
    "series_second_moment",
    "normalize",
    "weighted_norm",
    "influence",
    "influence_profile",
    "eps0",
    "min_active_level_norm",
    "truncate",
    "derivative",
    "gradient_second_moment",
    "evaluate_series",
    "evaluate_batch",
]


def factorial(n: int) -> float:
    if n <= 20:
        return float(math.factorial(n))
    return math.exp(math.lgamma(n + 1))


def canonical_index(index) -> tuple:
    """Sort ``index`` and reject repeats and non-positive entries."""
    key = tuple(sorted(int(i) for i in index))
    if any(i < 1 for i in key):
        raise BadLevel(f"indices are 1-based, got {tuple(index)}")
    if any(a == b for a, b in zip(key, key[1:])):
        raise RepeatedIndex(f"multi-index {tuple(index)} has a repeated entry")
    return key


class SymmetricKernel:
    """One chaos level: a sparse map from increasing ``m``-tuples to reals."""

    def __init__(self, level: int, entries: Mapping[tuple, float] | None = None):
        if level < 1:
            raise BadLevel(f"level must be >= 1, got {level}")
        self.level = int(level)
        store = {}
        for key, value in (entries or {}).items():
            key = tuple(int(i) for i in key)
            if len(key) != self.level:
                raise BadLevel(f"key {key} has length {len(key)} != level {self.level}")
            if list(key) != sorted(key) or len(set(key)) != len(key) or key[0] < 1:
                raise ValueError(f"key {key} is not a canonical multi-index")
            if value != 0.0:
                store[key] = float(value)
        self._entries = store

    @property
    def entries(self) -> Mapping[tuple, float]:
        return MappingProxyType(self._entries)

    @property
    def nnz(self) -> int:
        return len(self._entries)

    @property
    def support_bound(self) -> int:
        return max((k[-1] for k in self._entries), default=0)

    @cached_property
    def keys_array(self) -> np.ndarray:
        """(nnz, level) int array of 0-based column indices."""
        if not self._entries:
            return np.zeros((0, self.level), dtype=np.intp)
        return np.array(list(self._entries), dtype=np.intp) - 1

    @cached_property
    def values_array(self) -> np.ndarray:
        return np.fromiter(self._entries.values(), dtype=float, count=len(self._entries))

    @cached_property
    def inverted(self) -> dict:
        """index k -> list of (remaining (m-1)-tuple, value) for keys containing k."""
        inv = defaultdict(list)
        for key, v in self._entries.items():
            for pos, k in enumerate(key):
                inv[k].append((key[:pos] + key[pos + 1:], v))
        return dict(inv)

    @cached_property
    def sum_squares(self) -> float:
        return float(np.dot(self.values_array, self.values_array))

    def scaled(self, t: float) -> "SymmetricKernel":
        return SymmetricKernel(self.level, {k: t * v for k, v in self._entries.items()})

    def __eq__(self, other):
        return (isinstance(other, SymmetricKernel) and self.level == other.level
                and self._entries == other._entries)

    def __repr__(self):
        return f"SymmetricKernel(level={self.level}, nnz={self.nnz})"


def make_kernel(level: int, entries: Iterable[tuple[Iterable[int], float]]) -> SymmetricKernel:
    """Build a kernel from ``(index tuple, value)`` pairs, canonicalizing keys.

    >>> make_kernel(2, [((2, 1), 0.5)]).entries[(1, 2)]
    0.5
    """
    store = {}
    for index, value in entries:
        index = tuple(index)
        if len(index) != level:
            raise BadLevel(f"index {index} has length {len(index)} != level {level}")
        key = canonical_index(index)
        if key in store:
            raise DuplicateKey(f"index {index} duplicates canonical key {key}")
        store[key] = float(value)
    return SymmetricKernel(level, store)


def symmetric_value(k: SymmetricKernel, index) -> float:
    """``c(alpha)`` for an arbitrary (possibly unsorted or diagonal) tuple."""
    index = tuple(index)
    if len(index) != k.level:
        raise BadLevel(f"query {index} has length {len(index)} != level {k.level}")
    key = tuple(sorted(index))
    if any(a == b for a, b in zip(key, key[1:])):
        return 0.0
    return k._entries.get(key, 0.0)


class ChaosCoefficients:
    """Levels ``1..max_level`` of symmetric kernels; absent levels are zero."""

    def __init__(self, levels: Mapping[int, SymmetricKernel] | None = None,
                 max_level: int | None = None):
        levels = dict(levels or {})
        for m, k in levels.items():
            if k.level != m:
                raise BadLevel(f"kernel of level {k.level} stored under level {m}")
        top = max(levels, default=0)
        if max_level is None:
            max_level = max(top, 1)
        if top > max_level:
            raise BadLevel(f"level {top} exceeds max_level {max_level}")
        self.max_level = int(max_level)
        self._levels = {m: k for m, k in sorted(levels.items()) if k.nnz}

    @classmethod
    def from_entries(cls, spec: Mapping[int, Iterable], max_level: int | None = None):
        """``{m: [(index, value), ...]}`` -> coefficients."""
        return cls({m: make_kernel(m, ent) for m, ent in spec.items()}, max_level)

    @property
    def levels(self) -> Mapping[int, SymmetricKernel]:
        return MappingProxyType(self._levels)

    def kernel(self, m: int) -> SymmetricKernel:
        return self._levels.get(m) or SymmetricKernel(m)

    def active_levels(self) -> list[int]:
        return list(self._levels)

    @property
    def support_bound(self) -> int:
        return max((k.support_bound for k in self._levels.values()), default=0)

    @property
    def nnz(self) -> int:
        return sum(k.nnz for k in self._levels.values())

    def is_zero(self) -> bool:
        return not self._levels

    def scaled(self, t: float) -> "ChaosCoefficients":
        return ChaosCoefficients({m: k.scaled(t) for m, k in self._levels.items()},
                                 self.max_level)

    def __neg__(self):
        return self.scaled(-1.0)

    def __eq__(self, other):
        return (isinstance(other, ChaosCoefficients) and self.max_level == other.max_level
                and self._levels == other._levels)

    def __repr__(self):
        lv = ", ".join(f"{m}:{k.nnz}" for m, k in self._levels.items())
        return f"ChaosCoefficients(N={self.max_level}, nnz={{{lv}}})"


class AffineChaos:
    """``x -> constant + S(coefficients, x)``; the shape of a partial derivative."""

    def __init__(self, constant: float, coefficients: ChaosCoefficients):
        self.constant = float(constant)
        self.coefficients = coefficients

    def __call__(self, z) -> float:
        return self.constant + evaluate_series(self.coefficients, z)

    def level_value(self, m: int, index) -> float:
        """Coefficient at level ``m`` (``m = 0`` is the constant)."""
        if m == 0:
            return self.constant
        if m > self.coefficients.max_level:
            return 0.0
        return symmetric_value(self.coefficients.kernel(m), index)

    def __repr__(self):
        return f"AffineChaos(constant={self.constant!r}, {self.coefficients!r})"


# ---------------------------------------------------------------- diagnostics

def level_norm(c: ChaosCoefficients, m: int) -> float:
    """``|c|_m``: Euclidean norm of level ``m`` over all of ``N^m``."""
    if m not in c.levels:
        return 0.0
    return math.sqrt(factorial(m) * c.levels[m].sum_squares)


def series_second_moment(c: ChaosCoefficients) -> float:
    """``E[S(c, Z)^2] = sum_m m! |c|_m^2`` for any centred unit-variance ``Z``."""
    return sum(factorial(m) * level_norm(c, m) ** 2 for m in c.levels)


def normalize(c: ChaosCoefficients) -> ChaosCoefficients:
    i = series_second_moment(c)
    if i <= 0.0:
        raise ZeroKernel("cannot normalize a zero coefficient family")
    return c.scaled(1.0 / math.sqrt(i))


def weighted_norm(c: ChaosCoefficients, q: int, M: float) -> float:
    """``N_q(c, M)``; levels below ``q`` contribute nothing."""
    if q < 0 or M <= 0:
        raise ValueError("need q >= 0 and M > 0")
    total = 0.0
    for m in c.levels:
        if m < max(q, 1):
            continue
        total += M ** (m - q) * factorial(m) / factorial(m - q) * factorial(m) * level_norm(c, m) ** 2
    return math.sqrt(total)


def _row_masses(k: SymmetricKernel) -> dict:
    """k -> sum over (m-1)-tuples alpha in N^{m-1} of c(k, alpha)^2."""
    mult = factorial(k.level - 1)
    return {i: mult * sum(v * v for _, v in rows) for i, rows in k.inverted.items()}


def influence(c: ChaosCoefficients, m: int) -> float:
    """``delta_m(c)``: the largest row mass through a single index."""
    if m < 1:
        raise ValueError("level must be >= 1")
    if m not in c.levels:
        return 0.0
    k = c.levels[m]
    if m == 1:
        return float(np.max(np.abs(k.values_array)))
    return math.sqrt(max(_row_masses(k).values()))


def influence_profile(c: ChaosCoefficients, weighted: bool = False) -> float:
    """Sum of per-level influences; ``weighted`` multiplies level ``l`` by ``l!``."""
    return sum((factorial(m) if weighted else 1.0) * influence(c, m)
               for m in range(1, c.max_level + 1))


def eps0(c: ChaosCoefficients, M: float) -> tuple[float, float]:
    """Return ``(eps0(c, M), upper bound sum_m M^{2m} m! delta_{m+1}(c))``.

    The inner sum runs over ``m >= 0`` so that the level-1 coefficients
    ``c(k)`` contribute through the ``m = 0`` term.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    rows = defaultdict(float)
    for L, k in c.levels.items():
        m = L - 1
        w = M ** (2 * m) * factorial(m)
        for i, mass in (_row_masses(k).items() if L > 1 else
                        ((key[0], v * v) for key, v in k.entries.items())):
            rows[i] += w * mass
    value = math.sqrt(max(rows.values(), default=0.0))
    bound = sum(M ** (2 * m) * factorial(m) * influence(c, m + 1) for m in range(c.max_level))
    return value, bound


def min_active_level_norm(c: ChaosCoefficients) -> float:
    norms = [level_norm(c, m) for m in c.levels]
    norms = [x for x in norms if x > 0]
    return min(norms) if norms else math.inf


def truncate(c: ChaosCoefficients, J: int) -> ChaosCoefficients:
    """Restrict every level to indices ``<= J``."""
    if J < 1:
        raise ValueError("J must be >= 1")
    out = {}
    for m, k in c.levels.items():
        out[m] = SymmetricKernel(m, {key: v for key, v in k.entries.items() if key[-1] <= J})
    return ChaosCoefficients(out, c.max_level)


def derivative(c: ChaosCoefficients, j: int) -> AffineChaos:
    """Partial derivative of ``z -> S(c, z)`` in ``z_j`` as an affine chaos."""
    if j < 1:
        raise ValueError("j must be >= 1")
    constant = c.levels[1].entries.get((j,), 0.0) if 1 in c.levels else 0.0
    out = {}
    for L, k in c.levels.items():
        if L == 1:
            continue
        rows = k.inverted.get(j, ())
        if rows:
            out[L - 1] = SymmetricKernel(L - 1, {rest: L * v for rest, v in rows})
    return AffineChaos(constant, ChaosCoefficients(out, max(c.max_level - 1, 1)))


def gradient_second_moment(c: ChaosCoefficients) -> float:
    """``sum_m m * m! * |c|_m^2``: the mean of ``sum_j |d_j S|^2``."""
    return sum(m * factorial(m) * level_norm(c, m) ** 2 for m in c.levels)


# ----------------------------------------------------------------- evaluation

def _check_support(c: ChaosCoefficients, width: int):
    if c.support_bound > width:
        raise SupportMismatch(f"realization covers {width} indices, kernel needs {c.support_bound}")


def evaluate_series(c: ChaosCoefficients, z) -> float:
    """``S_N(c, z)`` at a single point ``z = (z_1, z_2, ...)``."""
    z = np.asarray(z, dtype=float)
    _check_support(c, z.shape[-1])
    total = 0.0
    for m, k in c.levels.items():
        total += factorial(m) * float(np.dot(np.prod(z[k.keys_array], axis=1), k.values_array))
    return total


def evaluate_batch(c: ChaosCoefficients, Z: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Evaluate ``S_N(c, .)`` on each row of ``Z`` (shape ``(n, J)``)."""
    Z = np.asarray(Z, dtype=float)
    _check_support(c, Z.shape[1])
    out = np.zeros(Z.shape[0])
    for m, k in c.levels.items():
        cols, vals = k.keys_array, k.values_array
        if m == 1:
            out += Z[:, cols[:, 0]] @ vals
        elif m == 2:
            A = _level2_matrix(k, Z.shape[1])
            out += np.einsum("ij,ij->i", np.asarray(A @ Z.T).T, Z)
        else:
            w = factorial(m)
            for s in range(0, Z.shape[0], chunk):
                blk = Z[s:s + chunk]
                prod = blk[:, cols[:, 0]].copy()
                for p in range(1, m):
                    prod *= blk[:, cols[:, p]]
                out[s:s + chunk] += w * (prod @ vals)
    return out


def _level2_matrix(k: SymmetricKernel, J: int):
    from scipy import sparse

    cols, vals = k.keys_array, k.values_array
    rows = np.concatenate([cols[:, 0], cols[:, 1]])
    cc = np.concatenate([cols[:, 1], cols[:, 0]])
    return sparse.csr_matrix((np.concatenate([vals, vals]), (rows, cc)), shape=(J, J))
