"""Quadratic expansions of chaos series.

``S(f, z)^2`` and the squared gradient ``sum_j |d_j S(c, z)|^2`` are rewritten as
double series in ``z`` and ``y = z^2 - 1``.  The coefficient families are

* ``A_{n,m}[f](eta, gamma)`` (square in terms of ``z`` and ``z^2``),
* ``B_{n,r,m}[f](eta, rho)``  (square in terms of ``z`` and ``y``),
* ``e_{n,r,m}[c]`` and ``e~^j_{n,r,m}[c]`` (gradient square, plain and weighted).

All of them are sums over permutations of ``eta``.  Because every kernel is
symmetric, a permutation only matters through the set of entries landing in the
first block, so the sum is evaluated as ``a! (n-a)!`` times a sum over
``a``-subsets.  Ordered sums over ``Gamma_n x Gamma_r`` of coefficients that are
symmetric and vanish on diagonals are likewise ``n! r!`` times sums over pairs
of disjoint sets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .contraction import contract, kappa_bar
from .errors import RepeatedIndex, SupportMismatch, TooLarge
from .kernels import (AffineChaos, ChaosCoefficients, derivative, evaluate_batch, evaluate_series,
                      factorial, gradient_second_moment, influence_profile,
                      series_second_moment)

__all__ = [
    "evaluate_series",
    "DoubleSeriesCoefficient",
    "IndexedDoubleSeries",
    "Realization",
    "product_coeff_A",
    "product_coeff_A_literal",
    "product_coeff_B",
    "grad_coeff_e",
    "grad_coeff_e_tilde",
    "grad_coeff_literal",
    "square_identity_check",
    "square_identity_check_B",
    "t_series",
    "T_series",
    "gradient_functionals",
    "GradientFunctionals",
    "gradient_expansion_mean",
    "burkholder_rhs",
    "small_ball_rhs",
    "nl0_rhs",
    "stirling_guard",
]


# ------------------------------------------------------------------ helpers

def _as_affine(f) -> AffineChaos:
    if isinstance(f, AffineChaos):
        return f
    if isinstance(f, ChaosCoefficients):
        return AffineChaos(0.0, f)
    raise TypeError(f"expected ChaosCoefficients or AffineChaos, got {type(f).__name__}")


def _has_repeat(idx) -> bool:
    return len(set(idx)) != len(idx)


def _mono(x: np.ndarray, idx) -> np.ndarray | float:
    """``prod_i x[idx_i]`` along the last axis (1 for the empty index)."""
    if not idx:
        return np.ones(x.shape[:-1]) if x.ndim > 1 else 1.0
    return np.prod(x[..., np.asarray(idx) - 1], axis=-1)


class _Pairs:
    """Memoized lookups of ``f_(p) (x)_o f_(q)`` at block keys, level 0 included."""

    def __init__(self, f: AffineChaos):
        self.f = f
        self._cache = {}

    def value(self, p, q, order, left, right) -> float:
        f = self.f
        if order == 0:
            a = f.level_value(p, left)
            if a == 0.0:
                return 0.0
            return a * f.level_value(q, right)
        if p < order or q < order:
            return 0.0
        c = f.coefficients
        if p not in c.levels or q not in c.levels:
            return 0.0
        key = (p, q, order)
        blk = self._cache.get(key)
        if blk is None:
            blk = self._cache[key] = contract(c.kernel(p), c.kernel(q), order)
        return blk.value(left, right)


def _pairs_for(f, cache):
    if cache is None:
        return _Pairs(_as_affine(f))
    return cache


def _subset_sum(pairs: _Pairs, eta, tail, shift, order, weight) -> float:
    """``sum_a weight(a) sum_{pi in Pi_n} K_{a+shift, n-a+shift}^{order}((p_a, tail), (q_{n-a}, tail))``."""
    n = len(eta)
    total = 0.0
    for a in range(n + 1):
        w = weight(a)
        if w == 0:
            continue
        perms = math.factorial(a) * math.factorial(n - a)
        s = 0.0
        for pos in itertools.combinations(range(n), a):
            left = tuple(eta[i] for i in pos) + tail
            right = tuple(eta[i] for i in range(n) if i not in pos) + tail
            s += pairs.value(a + shift, n - a + shift, order, left, right)
        total += w * perms * s
    return total


# ------------------------------------------------------------- coefficients

def product_coeff_A(f, n: int, m: int, eta, gamma, _cache=None) -> float:
    """``A_{n,m}[f](eta, gamma)``; zero whenever ``(eta, gamma)`` has a repeated index."""
    eta, gamma = tuple(eta), tuple(gamma)
    if len(eta) != n or len(gamma) != m:
        raise ValueError("index lengths do not match (n, m)")
    if _has_repeat(eta + gamma):
        return 0.0
    pairs = _pairs_for(f, _cache)
    w = lambda a: math.comb(a + m, m) * math.comb(n - a + m, m)
    return factorial(m) / factorial(n) * _subset_sum(pairs, eta, gamma, m, 0, w)


def product_coeff_A_literal(f, n: int, m: int, eta, gamma) -> float:
    """Reference ``A_{n,m}`` enumerating every permutation of ``eta`` (n <= 5)."""
    eta, gamma = tuple(eta), tuple(gamma)
    if n > 5:
        raise TooLarge("literal permutation sum limited to n <= 5")
    if _has_repeat(eta + gamma):
        return 0.0
    f = _as_affine(f)
    total = 0.0
    for a in range(n + 1):
        w = math.comb(a + m, m) * math.comb(n - a + m, m)
        s = 0.0
        for perm in itertools.permutations(eta):
            s += f.level_value(a + m, perm[:a] + gamma) * f.level_value(n - a + m, perm[a:] + gamma)
        total += w * s
    return factorial(m) / factorial(n) * total


def product_coeff_B(f, n: int, r: int, m: int, eta, rho, _cache=None) -> float:
    """``B_{n,r,m}[f](eta, rho) = sum_{beta in Gamma_{m-r}} A_{n,m}[f](eta, (rho, beta))``."""
    eta, rho = tuple(eta), tuple(rho)
    if m < r:
        raise ValueError("B requires m >= r")
    if len(eta) != n or len(rho) != r:
        raise ValueError("index lengths do not match (n, r)")
    if _has_repeat(eta + rho):
        return 0.0
    pairs = _pairs_for(f, _cache)
    w = lambda a: math.comb(a + m, m) * math.comb(n - a + m, m)
    return factorial(m) / factorial(n) * _subset_sum(pairs, eta, rho, m, m - r, w)


def grad_coeff_e(c: ChaosCoefficients, n: int, r: int, m: int, eta, rho,
                 as_printed: bool = False, _cache=None) -> float:
    """Coefficient ``e_{n,r,m}[c](eta, rho)`` of the squared-gradient expansion.

    The default normalization makes
    ``sum_j |d_j S|^2 = sum_{r, m>=r, n} C(m, r) t_{n,r}(e_{n,r,m})`` hold exactly.
    ``as_printed=True`` applies an extra ``1/(m-r+1)`` factor; under that
    normalization ``e_{0,0,m} = (m+1)! |c|_{m+1}^2``.
    """
    eta, rho = tuple(eta), tuple(rho)
    if m < r:
        raise ValueError("e requires m >= r")
    if len(eta) != n or len(rho) != r:
        raise ValueError("index lengths do not match (n, r)")
    if m + 1 > c.max_level or _has_repeat(eta + rho):
        return 0.0
    pairs = _pairs_for(c, _cache)
    w = lambda a: math.comb(a + m + 1, m + 1) * math.comb(n - a + m + 1, m + 1)
    pref = (m + 1) * factorial(m + 1) / factorial(n)
    if as_printed:
        pref /= (m - r + 1)
    return pref * _subset_sum(pairs, eta, rho, m + 1, m - r + 1, w)


def grad_coeff_e_tilde(c: ChaosCoefficients, j: int, n: int, r: int, m: int, eta, rho,
                       _cache=None) -> float:
    """Coefficient ``e~^j_{n,r,m}[c](eta, rho)``; zero when ``j`` is in ``(eta, rho)``."""
    eta, rho = tuple(eta), tuple(rho)
    if m < r:
        raise ValueError("e~ requires m >= r")
    if len(eta) != n or len(rho) != r:
        raise ValueError("index lengths do not match (n, r)")
    if m + 1 > c.max_level or _has_repeat(eta + rho + (j,)):
        return 0.0
    pairs = _pairs_for(c, _cache)
    w = lambda a: math.comb(a + m + 1, m + 1) * math.comb(n - a + m + 1, m + 1)
    pref = (m + 1) * factorial(m + 1) / factorial(n)
    return pref * _subset_sum(pairs, eta, rho + (j,), m + 1, m - r, w)


def grad_coeff_literal(c: ChaosCoefficients, n: int, r: int, m: int, eta, rho) -> float:
    """Reference ``e_{n,r,m}`` as ``sum_j B_{n,r,m}[d_j c]`` with literal permutations."""
    eta, rho = tuple(eta), tuple(rho)
    if _has_repeat(eta + rho):
        return 0.0
    J = c.support_bound
    total = 0.0
    for j in range(1, J + 1):
        f = derivative(c, j)
        for beta in itertools.product(range(1, J + 1), repeat=m - r):
            total += product_coeff_A_literal(f, n, m, eta, rho + beta)
    return total


# ------------------------------------------------------------ double series

@dataclass
class DoubleSeriesCoefficient:
    """``a(alpha, beta)`` on ``Gamma_m x Gamma_n``, keyed by sorted blocks."""

    m: int
    n: int
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (alpha, beta), v in self.values.items():
            alpha, beta = tuple(sorted(alpha)), tuple(sorted(beta))
            if len(alpha) != self.m or len(beta) != self.n:
                raise ValueError(f"key {(alpha, beta)} does not match sizes ({self.m}, {self.n})")
            if _has_repeat(alpha + beta):
                raise RepeatedIndex(f"coefficient key {(alpha, beta)} lies on a diagonal")
            if v != 0.0:
                clean[(alpha, beta)] = clean.get((alpha, beta), 0.0) + float(v)
        self.values = clean

    def value(self, alpha, beta) -> float:
        if _has_repeat(tuple(alpha) + tuple(beta)):
            return 0.0
        return self.values.get((tuple(sorted(alpha)), tuple(sorted(beta))), 0.0)

    def restricted(self, J: int) -> dict:
        return {k: v for k, v in self.values.items() if max(k[0] + k[1], default=0) <= J}

    def norm(self, J: int) -> float:
        """``|a|_{m,n,J}``: root sum of squares over ordered indices in ``{1..J}``."""
        s = sum(v * v for v in self.restricted(J).values())
        return math.sqrt(factorial(self.m) * factorial(self.n) * s)


@dataclass
class IndexedDoubleSeries:
    """A family ``(a_j)_j`` of double-series coefficients with ``a_j = 0`` on keys containing ``j``."""

    m: int
    n: int
    members: dict = field(default_factory=dict)

    def __post_init__(self):
        for j, a in self.members.items():
            if (a.m, a.n) != (self.m, self.n):
                raise ValueError("member sizes differ from the family sizes")
            for alpha, beta in a.values:
                if j in alpha or j in beta:
                    raise RepeatedIndex(f"a_{j} is nonzero at {(alpha, beta)} which contains {j}")

    def norm(self, J: int) -> float:
        return math.sqrt(sum(a.norm(J) ** 2 for a in self.members.values()))


@dataclass
class Realization:
    """Values of ``(Z_k, Y_k, chi~_k)``; ``y`` defaults to ``z^2 - 1``.

    ``z`` may be a vector of length ``J`` or a batch of shape ``(B, J)``.
    """

    z: np.ndarray
    y: np.ndarray | None = None
    chi: np.ndarray | None = None
    chi_prob: float | np.ndarray = 0.0
    chi_tilde: np.ndarray | None = None

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.y = self.z ** 2 - 1.0 if self.y is None else np.asarray(self.y, dtype=float)
        if self.y.shape != self.z.shape:
            raise SupportMismatch("y and z have different shapes")
        if self.chi is not None:
            self.chi = np.asarray(self.chi, dtype=float)
            if self.chi_tilde is None:
                self.chi_tilde = self.chi - self.chi_prob
        if self.chi_tilde is not None:
            self.chi_tilde = np.asarray(self.chi_tilde, dtype=float)
            if self.chi_tilde.shape != self.z.shape:
                raise SupportMismatch("chi~ and z have different shapes")

    @property
    def J(self) -> int:
        return self.z.shape[-1]


def t_series(a: DoubleSeriesCoefficient, real: Realization, J: int | None = None):
    """``t_{m,n}(J, a) = sum_{alpha in Gamma_m(J)} sum_{beta in Gamma_n(J)} z^alpha y^beta a(alpha, beta)``."""
    J = real.J if J is None else J
    if J > real.J:
        raise SupportMismatch(f"J = {J} exceeds realization width {real.J}")
    w = factorial(a.m) * factorial(a.n)
    total = 0.0
    for (alpha, beta), v in a.restricted(J).items():
        total = total + w * v * _mono(real.z, alpha) * _mono(real.y, beta)
    return total


def T_series(abar: IndexedDoubleSeries, real: Realization, J: int | None = None):
    """``T_{m,n}(J, abar) = sum_{alpha, beta} z^alpha y^beta sum_j a_j(alpha, beta) chi~_j``."""
    J = real.J if J is None else J
    if real.chi_tilde is None:
        raise ValueError("realization carries no chi~ values")
    total = 0.0
    for j, a in abar.members.items():
        if j > real.J:
            raise SupportMismatch(f"member index {j} outside the realization")
        total = total + real.chi_tilde[..., j - 1] * t_series(a, real, J)
    return total


def t_series_literal(a: DoubleSeriesCoefficient, real: Realization, J: int | None = None):
    """``t_series`` summing over every ordered pair of tuples (small ``J`` only)."""
    J = real.J if J is None else J
    total = 0.0
    for alpha in itertools.product(range(1, J + 1), repeat=a.m):
        for beta in itertools.product(range(1, J + 1), repeat=a.n):
            v = a.value(alpha, beta)
            if v:
                total = total + v * _mono(real.z, alpha) * _mono(real.y, beta)
    return total


# ------------------------------------------------------------ identities

def _disjoint_pairs(support, max_first, max_second):
    """Every pair of disjoint sorted subsets with bounded sizes."""
    support = sorted(support)
    for k in range(min(max_first, len(support)) + 1):
        for first in itertools.combinations(support, k):
            rest = [i for i in support if i not in first]
            for l in range(min(max_second, len(rest)) + 1):
                for second in itertools.combinations(rest, l):
                    yield first, second


def _support(f: AffineChaos) -> list:
    c = f.coefficients
    return sorted({i for k in c.levels.values() for key in k.entries for i in key})


def square_identity_check(f, z, max_support: int = 8):
    """Both sides of ``S(f, z)^2 = sum_{m,n} sum_{gamma, eta} (z^gamma)^2 z^eta A_{n,m}(eta, gamma)``."""
    f = _as_affine(f)
    z = np.asarray(z, dtype=float)
    lhs = (f.constant + evaluate_series(f.coefficients, z)) ** 2
    supp = _support(f)
    if len(supp) > max_support:
        raise TooLarge(f"support of size {len(supp)} exceeds {max_support}")
    N = f.coefficients.max_level if not f.coefficients.is_zero() else 0
    pairs = _Pairs(f)
    rhs = 0.0
    for gamma, eta in _disjoint_pairs(supp, N, 2 * N):
        m, n = len(gamma), len(eta)
        A = product_coeff_A(f, n, m, eta, gamma, _cache=pairs)
        if A:
            rhs += factorial(m) * factorial(n) * A * _mono(z ** 2, gamma) * _mono(z, eta)
    return lhs, rhs


def square_identity_check_B(f, z, max_support: int = 8):
    """Both sides of ``S(f, z)^2 = sum_{r, m>=r, n} C(m, r) t_{n,r}(B_{n,r,m})``."""
    f = _as_affine(f)
    real = Realization(z)
    lhs = (f.constant + evaluate_series(f.coefficients, real.z)) ** 2
    supp = _support(f)
    if len(supp) > max_support:
        raise TooLarge(f"support of size {len(supp)} exceeds {max_support}")
    N = f.coefficients.max_level if not f.coefficients.is_zero() else 0
    pairs = _Pairs(f)
    rhs = 0.0
    for eta, rho in _disjoint_pairs(supp, 2 * N, N):
        n, r = len(eta), len(rho)
        mono = factorial(n) * factorial(r) * _mono(real.z, eta) * _mono(real.y, rho)
        for m in range(r, N + 1):
            if n > 2 * (N - m):
                continue
            B = product_coeff_B(f, n, r, m, eta, rho, _cache=pairs)
            rhs += math.comb(m, r) * B * mono
    return lhs, rhs


@dataclass
class GradientFunctionals:
    I: np.ndarray | float
    I_tilde: np.ndarray | float | None
    sigma: np.ndarray | float | None
    expansion: np.ndarray | float
    expansion_tilde: np.ndarray | float | None


def _gradient_tables(c: ChaosCoefficients, supp, as_printed=False, tilde=False):
    """Nonzero ``(C(m,r) * e, eta, rho[, j])`` terms of the expansion."""
    N = c.max_level
    pairs = _Pairs(AffineChaos(0.0, c))
    plain, weighted = [], []
    for eta, rho in _disjoint_pairs(supp, 2 * (N - 1), N - 1):
        n, r = len(eta), len(rho)
        for m in range(r, N):
            if n > 2 * (N - m - 1):
                continue
            w = math.comb(m, r)
            if not as_printed:
                e = grad_coeff_e(c, n, r, m, eta, rho, _cache=pairs)
                if e:
                    plain.append((w * e, eta, rho))
            else:
                e = grad_coeff_e(c, n, r, m, eta, rho, as_printed=True, _cache=pairs)
                if e:
                    plain.append((e, eta, rho))
            if tilde:
                for j in supp:
                    if j in eta or j in rho:
                        continue
                    et = grad_coeff_e_tilde(c, j, n, r, m, eta, rho, _cache=pairs)
                    if et:
                        weighted.append((w * et, eta, rho, j))
    return plain, weighted


def gradient_functionals(c: ChaosCoefficients, real: Realization, as_printed: bool = False,
                         max_support: int = 8) -> GradientFunctionals:
    """Direct ``I = sum_j |d_j S|^2``, ``I~ = sum_j chi~_j |d_j S|^2``, ``sigma = sum_j chi_j |d_j S|^2``
    together with the coefficient expansions of ``I`` and ``I~`` at the same realization."""
    if c.support_bound > real.J:
        raise SupportMismatch(f"realization covers {real.J} indices, kernel needs {c.support_bound}")
    supp = sorted({i for k in c.levels.values() for key in k.entries for i in key})
    if len(supp) > max_support:
        raise TooLarge(f"support of size {len(supp)} exceeds {max_support}")
    z = real.z
    batch = z.ndim > 1
    grads = []
    for j in supp:
        d = derivative(c, j)
        if batch:
            g = d.constant + evaluate_batch(d.coefficients, z) if not d.coefficients.is_zero() \
                else np.full(z.shape[0], d.constant)
        else:
            g = d(z)
        grads.append(g)
    sq = [g * g for g in grads]
    I = sum(sq) if sq else 0.0
    I_tilde = sigma = None
    if real.chi_tilde is not None:
        I_tilde = sum(real.chi_tilde[..., j - 1] * s for j, s in zip(supp, sq)) if sq else 0.0
    if real.chi is not None:
        sigma = sum(real.chi[..., j - 1] * s for j, s in zip(supp, sq)) if sq else 0.0
    plain, weighted = _gradient_tables(c, supp, as_printed, tilde=real.chi_tilde is not None)
    exp = 0.0
    for v, eta, rho in plain:
        exp = exp + factorial(len(eta)) * factorial(len(rho)) * v * _mono(z, eta) * _mono(real.y, rho)
    exp_t = None
    if real.chi_tilde is not None:
        exp_t = 0.0
        for v, eta, rho, j in weighted:
            exp_t = exp_t + (factorial(len(eta)) * factorial(len(rho)) * v * _mono(z, eta)
                             * _mono(real.y, rho) * real.chi_tilde[..., j - 1])
    return GradientFunctionals(I, I_tilde, sigma, exp, exp_t)


def gradient_expansion_mean(c: ChaosCoefficients, as_printed: bool = False) -> dict:
    """The ``n = r = 0`` term of the gradient expansion under both normalizations.

    Returns the centered mean ``sum_m m m! |c|_m^2`` (what the expansion gives),
    the series second moment ``i_N``, and the constant term of the chosen form.
    """
    N = c.max_level
    const = 0.0
    for m in range(0, N):
        const += grad_coeff_e(c, 0, 0, m, (), (), as_printed=as_printed)
    return {"constant_term": const,
            "gradient_mean": gradient_second_moment(c),
            "i_N": series_second_moment(c)}


# ------------------------------------------------------------------- bounds

def burkholder_rhs(a, m: int, n: int, J: int, p: float, b_p: float | None = None,
                   M_p: float = 1.0) -> float:
    """Moment bound for ``t_{m,n}`` (plain family) or ``T_{m,n}`` (indexed family)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    b_p = p - 1.0 if b_p is None else float(b_p)
    if b_p <= 0:
        raise ValueError("b_p must be positive")
    k = m + n
    growth = (math.sqrt(2.0) * b_p * M_p) ** k
    if isinstance(a, IndexedDoubleSeries):
        return math.sqrt(8 * b_p ** 2 * (4 ** k - 1) * factorial(k) / 3.0) * growth * a.norm(J)
    return math.sqrt(factorial(k)) * growth * a.norm(J)


def _structural_factor(N: int) -> float:
    return factorial(N) ** 3 * 2.0 ** N * N ** -1.25


def small_ball_rhs(c: ChaosCoefficients, N: int, p: float, m_r: float, C_p: float = 1.0) -> float:
    """Bound on ``P(sigma_{S_N} <= eta)`` for ``eta <= m_r i_N / 2``."""
    if N < 1 or p <= 0 or m_r <= 0 or C_p <= 0:
        raise ValueError("N, p, m_r and C_p must be positive")
    i = series_second_moment(c)
    kb = kappa_bar(c)
    db = influence_profile(c, weighted=False)
    if kb + db == 0.0:
        return 0.0
    base = C_p * (1 + i) / (m_r * i) * _structural_factor(N) * (kb + db)
    return base ** p


def nl0_rhs(c: ChaosCoefficients, N: int, p: float, C_p: float = 1.0) -> float:
    """Bound on ``||I~_N||_p`` up to the universal constant ``C_p``."""
    if N < 1 or p <= 0 or C_p <= 0:
        raise ValueError("N, p and C_p must be positive")
    i = series_second_moment(c)
    return C_p * math.sqrt(1 + i) * _structural_factor(N) * (kappa_bar(c) + influence_profile(c, weighted=False))


def stirling_guard(N_max: int = 30) -> list:
    """``(N, lhs, rhs)`` for ``((2N-2)!)^(1/2) <= 2^N N^(-5/4) N!``."""
    out = []
    for N in range(1, N_max + 1):
        lhs = math.sqrt(math.factorial(2 * N - 2))
        rhs = 2.0 ** N * N ** -1.25 * math.factorial(N)
        out.append((N, lhs, rhs))
    return out
