"""Seeded sampling of chaos series, the Doeblin splitting sampler, and sample statistics."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special, stats

from .errors import InvalidDoeblin, TooFewSamples
from .kernels import ChaosCoefficients, evaluate_batch
from .oracle import GAUSSIAN, RADEMACHER, MomentTable

__all__ = [
    "SourceDistribution",
    "SampleBatch",
    "BumpProfile",
    "registry",
    "get_distribution",
    "register",
    "validate_distribution",
    "sample_series",
    "empirical_kappa4",
    "Kappa4Estimate",
    "normal_cdf",
    "kolmogorov_distance",
    "smooth_distance",
    "bump",
    "split_probability",
    "split_sampler",
    "verify_split",
    "SplitCheck",
    "bump_scaling_check",
]

SQRT3 = math.sqrt(3.0)
LAPLACE_B = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SourceDistribution:
    """A centered, unit-variance law for the coordinates ``Z_k``.

    ``sampler(rng, count)`` draws from a ``numpy.random.Generator``.  ``abs3`` is
    ``E|Z|^3``.  ``doeblin`` is an admissible ``(z, r, eps)`` lower-bound triple.
    """

    name: str
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    moments: MomentTable
    abs3: float
    density: Callable | None = None
    doeblin: tuple | None = None

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.sampler(rng, count)


def _uniform_mu(k):
    return 0.0 if k % 2 else 3.0 ** (k // 2) / (k + 1)


def _laplace_mu(k):
    return 0.0 if k % 2 else math.factorial(k) * LAPLACE_B ** k


_BUILTINS = {
    "gaussian": SourceDistribution(
        "gaussian", lambda g, n: g.standard_normal(n), GAUSSIAN, 2.0 * math.sqrt(2.0 / math.pi),
        density=lambda x: np.exp(-0.5 * np.asarray(x) ** 2) / math.sqrt(2 * math.pi),
        doeblin=(0.0, 0.5, 0.24)),
    "rademacher": SourceDistribution(
        "rademacher", lambda g, n: 2.0 * g.integers(0, 2, n) - 1.0, RADEMACHER, 1.0),
    "uniform": SourceDistribution(
        "uniform", lambda g, n: g.uniform(-SQRT3, SQRT3, n), MomentTable("uniform", _uniform_mu),
        9.0 / (4.0 * SQRT3),
        density=lambda x: np.where(np.abs(x) <= SQRT3, 1.0 / (2 * SQRT3), 0.0),
        doeblin=(0.0, 0.5, 0.28)),
    "laplace": SourceDistribution(
        "laplace", lambda g, n: g.laplace(0.0, LAPLACE_B, n), MomentTable("laplace", _laplace_mu),
        6.0 * LAPLACE_B ** 3,
        density=lambda x: np.exp(-np.abs(x) / LAPLACE_B) / (2 * LAPLACE_B),
        doeblin=(0.0, 0.5, 0.17)),
}
_REGISTRY = dict(_BUILTINS)


def registry() -> list:
    return list(_REGISTRY.values())


def get_distribution(name) -> SourceDistribution:
    if isinstance(name, SourceDistribution):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown distribution {name!r}; known: {sorted(_REGISTRY)}") from None


def validate_distribution(dist: SourceDistribution, n: int = 10 ** 6, seed: int = 0) -> tuple:
    """Check ``|mean| <= 0.01`` and ``|var - 1| <= 0.02`` on ``n`` draws."""
    x = dist.sample(np.random.default_rng(seed), n)
    mean, var = float(x.mean()), float(x.var())
    if abs(mean) > 0.01 or abs(var - 1.0) > 0.02:
        raise ValueError(f"{dist.name}: sample mean {mean:.4f}, variance {var:.4f} not standardized")
    return mean, var


def register(dist: SourceDistribution, validate: bool = True) -> SourceDistribution:
    if validate:
        validate_distribution(dist)
    _REGISTRY[dist.name] = dist
    return dist


# ------------------------------------------------------------------ sampling

@dataclass
class SampleBatch:
    values: np.ndarray
    seed: int
    shards: int
    layout: tuple
    dist: str = ""

    def __len__(self):
        return len(self.values)


def _shard_sizes(n, shards):
    base, extra = divmod(n, shards)
    return tuple(base + (i < extra) for i in range(shards))


def _shard_rngs(seed, shards):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(shards)]


def _run_shards(fn, seed, n, shards, workers):
    sizes = _shard_sizes(n, shards)
    rngs = _shard_rngs(seed, shards)
    jobs = list(zip(rngs, sizes))
    if workers and workers > 1 and shards > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: fn(*a), jobs))
    else:
        parts = [fn(*a) for a in jobs]
    return np.concatenate(parts) if parts else np.zeros(0), sizes


def sample_series(c: ChaosCoefficients, dist, seed: int, n: int, shards: int = 1,
                  workers: int | None = None, chunk: int = 8192) -> SampleBatch:
    """``n`` independent draws of ``S(c, Z)`` with i.i.d. coordinates from ``dist``.

    The output depends only on ``(seed, shards)``: shard ``i`` uses the ``i``-th
    spawned child of ``SeedSequence(seed)`` and draws its rows in fixed chunks.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    dist = get_distribution(dist)
    J = c.support_bound

    def shard(rng, size):
        out = np.empty(size)
        for s in range(0, size, chunk):
            k = min(chunk, size - s)
            Z = dist.sample(rng, k * J).reshape(k, J)
            out[s:s + k] = evaluate_batch(c, Z) if J else 0.0
        return out

    values, sizes = _run_shards(shard, seed, n, shards, workers)
    return SampleBatch(values, seed, shards, sizes, dist.name)


# ---------------------------------------------------------------- statistics

class Kappa4Estimate(NamedTuple):
    value: float
    se: float


def _kappa4_plain(x):
    d = x - x.mean()
    m2 = np.mean(d * d)
    return float(np.mean(d ** 4) - 3.0 * m2 * m2)


def empirical_kappa4(batch, n_blocks: int = 50) -> Kappa4Estimate:
    """``m4 - 3 m2^2`` from central moments, with a batch-means standard error."""
    x = np.asarray(batch.values if isinstance(batch, SampleBatch) else batch, dtype=float)
    if len(x) < 1000:
        raise TooFewSamples(f"{len(x)} samples; at least 1000 needed")
    est = _kappa4_plain(x)
    blocks = np.array_split(x, n_blocks)
    per = np.array([_kappa4_plain(b) for b in blocks])
    return Kappa4Estimate(est, float(per.std(ddof=1) / math.sqrt(n_blocks)))


def normal_cdf(scale: float = 1.0) -> Callable:
    """CDF of ``N(0, scale^2)``."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    return lambda x: special.ndtr(np.asarray(x) / scale)


def kolmogorov_distance(batch, target: Callable) -> float:
    """``sup_x |F_n(x) - F(x)|`` for the empirical CDF of ``batch``."""
    if target is None or not callable(target):
        raise ValueError("target must be a CDF callable")
    x = np.asarray(batch.values if isinstance(batch, SampleBatch) else batch, dtype=float)
    if len(x) == 0:
        raise ValueError("empty batch")
    return float(stats.kstest(x, target).statistic)


def smooth_distance(c: ChaosCoefficients, distA, distB, f: Callable, seedA: int, seedB: int,
                    n: int, shards: int = 1) -> tuple:
    """``|E f(S_A) - E f(S_B)|`` estimate and its 3-sigma half width."""
    a = f(sample_series(c, distA, seedA, n, shards).values)
    b = f(sample_series(c, distB, seedB, n, shards).values)
    a = np.broadcast_to(np.asarray(a, dtype=float), (n,))
    b = np.broadcast_to(np.asarray(b, dtype=float), (n,))
    est = abs(float(a.mean()) - float(b.mean()))
    half = 3.0 * math.sqrt(float(a.var(ddof=1)) / n + float(b.var(ddof=1)) / n)
    return est, half


# --------------------------------------------------------------- bump profile

def _theta(t, r):
    u = np.asarray(t, dtype=float) / r - 1.0
    with np.errstate(divide="ignore"):
        return 1.0 - 1.0 / (1.0 - u * u)


def _psi(t, r):
    a = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(a)
    out[a <= r] = 1.0
    mid = (a > r) & (a < 2 * r)
    out[mid] = np.exp(_theta(a[mid], r))
    return out


@dataclass(frozen=True)
class BumpProfile:
    """Smooth plateau ``psi_r`` equal to 1 on ``[-r, r]`` and supported in ``[-2r, 2r]``."""

    r: float
    m_r: float = field(default=0.0)

    def theta(self, t):
        return _theta(t, self.r)

    def psi(self, t):
        return _psi(t, self.r)

    def density(self, xi, z: float = 0.0):
        """Density of ``V``: ``psi_r(|xi - z|^2) / m_r``."""
        return self.psi((np.asarray(xi, dtype=float) - z) ** 2) / self.m_r


def bump(r: float) -> BumpProfile:
    """``BumpProfile`` with ``m_r = int psi_r(xi^2) dxi`` by adaptive quadrature."""
    if r <= 0:
        raise ValueError("r must be positive")
    a, b = math.sqrt(r), math.sqrt(2 * r)
    tail, _ = integrate.quad(lambda x: float(_psi(x * x, r)), a, b, epsabs=0.0, epsrel=1e-11, limit=200)
    return BumpProfile(r, 2.0 * (a + tail))


def bump_scaling_check(rs=(0.1, 0.5, 1.0, 2.0), ls=(1, 2), ps=(1, 2), grid: int = 10 ** 4) -> dict:
    """``sup_t psi_r(t) |theta_r^(l)(t)|^p r^(lp)`` on ``r < t < 2r`` by central differences.

    Inside ``[-r, r]`` the plateau is constant, so only the transition band is
    scanned.  Returns ``{(l, p): [value for each r]}``.
    """
    out = {}
    u = np.linspace(1.0, 2.0, grid + 2)[1:-1]
    for l in ls:
        for p in ps:
            vals = []
            for r in rs:
                t = r * u
                h = r * 1e-4
                if l == 1:
                    d = (_theta(t + h, r) - _theta(t - h, r)) / (2 * h)
                else:
                    d = (_theta(t + h, r) - 2 * _theta(t, r) + _theta(t - h, r)) / (h * h)
                w = _psi(t, r) * np.abs(d) ** p * r ** (l * p)
                vals.append(float(np.nanmax(np.where(np.isfinite(w), w, np.nan))))
            out[(l, p)] = vals
    return out


# ------------------------------------------------------------ splitting

def split_probability(doeblin: tuple) -> float:
    """``P(chi = 1) = eps * m_r``."""
    z, r, eps = doeblin
    return eps * bump(r).m_r


def _check_doeblin(dist: SourceDistribution, doeblin, grid: int = 4001):
    if dist.density is None:
        raise InvalidDoeblin(f"{dist.name} has no Lebesgue density; no (z, r, eps) lower bound exists")
    if doeblin is None:
        raise InvalidDoeblin(f"{dist.name} carries no Doeblin triple")
    z, r, eps = (float(v) for v in doeblin)
    if r <= 0 or eps <= 0:
        raise InvalidDoeblin("r and eps must be positive")
    prof = bump(r)
    if eps * prof.m_r > 1:
        raise InvalidDoeblin(f"eps * m_r = {eps * prof.m_r:.4f} exceeds 1")
    w = math.sqrt(2 * r)
    xi = np.linspace(z - w, z + w, grid)
    resid = dist.density(xi) - eps * prof.psi((xi - z) ** 2)
    if resid.min() < -1e-12:
        k = int(resid.argmin())
        raise InvalidDoeblin(f"residual density negative ({resid[k]:.3g}) at xi = {xi[k]:.4f}")
    return z, r, eps, prof


def _draw_v(rng, k, z, r, prof):
    w = math.sqrt(2 * r)
    out = np.empty(0)
    while len(out) < k:
        need = k - len(out)
        x = rng.uniform(-w, w, 2 * need + 16)
        keep = rng.random(len(x)) < prof.psi(x * x)
        out = np.concatenate([out, z + x[keep]])
    return out[:k]


def _draw_u(rng, k, dist, z, eps, prof):
    out = np.empty(0)
    while len(out) < k:
        need = k - len(out)
        x = dist.sample(rng, 2 * need + 16)
        p = dist.density(x)
        acc = np.where(p > 0, (p - eps * prof.psi((x - z) ** 2)) / np.where(p > 0, p, 1.0), 0.0)
        keep = rng.random(len(x)) < acc
        out = np.concatenate([out, x[keep]])
    return out[:k]


def split_sampler(dist, seed: int, n: int, doeblin: tuple | None = None, shards: int = 1,
                  return_chi: bool = False):
    """Draw ``chi V + (1 - chi) U`` with ``chi ~ Bernoulli(eps m_r)``.

    ``V`` has density ``psi_r(|xi - z|^2) / m_r`` and ``U`` the normalized residual
    ``(p(xi) - eps psi_r(|xi - z|^2)) / (1 - eps m_r)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    dist = get_distribution(dist)
    z, r, eps, prof = _check_doeblin(dist, doeblin if doeblin is not None else dist.doeblin)
    q = eps * prof.m_r

    def shard(rng, size):
        chi = rng.random(size) < q
        k = int(chi.sum())
        out = np.empty((2, size))
        out[1] = chi
        out[0, chi] = _draw_v(rng, k, z, r, prof)
        out[0, ~chi] = _draw_u(rng, size - k, dist, z, eps, prof)
        return out.T

    sizes = _shard_sizes(n, shards)
    rngs = _shard_rngs(seed, shards)
    parts = np.concatenate([shard(g, s) for g, s in zip(rngs, sizes)])
    batch = SampleBatch(parts[:, 0].copy(), seed, shards, sizes, dist.name)
    if return_chi:
        return batch, parts[:, 1].astype(bool)
    return batch


@dataclass(frozen=True)
class SplitCheck:
    statistic: float
    threshold: float
    chi_rate: float
    chi_prob: float
    n: int

    @property
    def ok(self) -> bool:
        return self.statistic <= self.threshold


def verify_split(dist, n: int, seedA: int, seedB: int, doeblin: tuple | None = None,
                 alpha: float = 0.01) -> SplitCheck:
    """Two-sample Kolmogorov statistic between direct draws and split-constructed draws."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dist = get_distribution(dist)
    doeblin = doeblin if doeblin is not None else dist.doeblin
    direct = dist.sample(np.random.default_rng(seedA), n)
    split, chi = split_sampler(dist, seedB, n, doeblin, return_chi=True)
    ks = float(stats.ks_2samp(direct, split.values).statistic)
    # asymptotic two-sample critical value c(alpha) * sqrt(2 / n)
    c_alpha = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return SplitCheck(ks, c_alpha * math.sqrt(2.0 / n), float(chi.mean()), split_probability(doeblin), n)
