"""Bound evaluators, kernel families and convergence experiments."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .contraction import kappa4, kappa_bar
from .errors import HypothesisA9Violated, NotNormalized, ThirdMomentNonzero
from .kernels import (ChaosCoefficients, SymmetricKernel, eps0, factorial, influence,
                      influence_profile, level_norm, min_active_level_norm, normalize,
                      series_second_moment, weighted_norm)
from .sampling import empirical_kappa4, get_distribution, kolmogorov_distance, normal_cdf, sample_series

__all__ = [
    "BoundConstants",
    "KernelFamily",
    "generate_family",
    "path_kappa4_tridiagonal",
    "complete_kappa4",
    "smooth_bound_rhs",
    "smooth_bound4_rhs",
    "burkholder_M",
    "fourth_moment_bound_rhs",
    "tv_bound_factors",
    "clt_experiment",
    "ExperimentTable",
    "tail_uniformity",
    "TEST_FUNCTIONS",
]


@dataclass(frozen=True)
class BoundConstants:
    """Unspecified universal constants, all defaulting to 1 (``b_p`` to ``p - 1``)."""

    C_p: float = 1.0
    C_star: float = 1.0
    d_star: float = 1.0
    c_star: float = 1.0
    M_star: float = 1.0
    p_star: float = 1.0
    b: dict = field(default_factory=dict)

    def __post_init__(self):
        for k in ("C_p", "C_star", "d_star", "c_star", "M_star", "p_star"):
            if not getattr(self, k) > 0:
                raise ValueError(f"{k} must be positive")
        if any(not v > 0 for v in self.b.values()):
            raise ValueError("b_p values must be positive")

    def b_p(self, p) -> float:
        return float(self.b.get(p, self.b.get(str(p), p - 1.0)))

    @classmethod
    def from_dict(cls, d: dict) -> "BoundConstants":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


# name -> (f, sup|f'''|, sup|f''''|)
TEST_FUNCTIONS = {
    "sin": (np.sin, 1.0, 1.0),
    "cos": (np.cos, 1.0, 1.0),
    # g(x) = exp(-x^2/2): sup|g'''| = sqrt(6)... attained at x^2 = 3 - sqrt(6); computed below
    "gauss": (lambda x: np.exp(-0.5 * np.asarray(x) ** 2), None, 3.0),
}


def _gauss_sup3():
    x = np.linspace(0, 5, 200001)
    return float(np.max(np.abs((3 * x - x ** 3) * np.exp(-0.5 * x * x))))


TEST_FUNCTIONS["gauss"] = (TEST_FUNCTIONS["gauss"][0], _gauss_sup3(), 3.0)


# ------------------------------------------------------------------ families

@dataclass(frozen=True)
class KernelFamily:
    name: str
    m: int
    n: int
    seed: int = 0


def generate_family(spec: KernelFamily) -> ChaosCoefficients:
    """Normalized (``i_N = 1``) level-``m`` kernel on ``{1..n}``.

    ``complete``: constant on every increasing ``m``-tuple.  ``path``: constant
    on runs ``(i, ..., i+m-1)``.  ``random``: up to ``4n`` random ``m``-subsets with
    standard normal values.
    """
    m, n = spec.m, spec.n
    if m < 1:
        raise ValueError("m must be >= 1")
    if n < m + 1:
        raise ValueError("family needs n >= m + 1")
    if spec.name == "complete":
        if math.comb(n, m) > 2_000_000:
            raise ValueError("complete family too large")
        entries = {key: 1.0 for key in itertools.combinations(range(1, n + 1), m)}
    elif spec.name == "path":
        entries = {tuple(range(i, i + m)): 1.0 for i in range(1, n - m + 2)}
    elif spec.name == "random":
        rng = np.random.default_rng(spec.seed)
        total = math.comb(n, m)
        k = min(total, 4 * n)
        if total <= 50_000:
            pool = list(itertools.combinations(range(1, n + 1), m))
            keys = [pool[i] for i in sorted(rng.choice(total, size=k, replace=False))]
        else:
            seen = set()
            while len(seen) < k:
                seen.add(tuple(sorted(rng.choice(n, size=m, replace=False) + 1)))
            keys = sorted(seen)
        entries = dict(zip(keys, rng.standard_normal(len(keys))))
    else:
        raise ValueError(f"unknown family {spec.name!r} (complete | path | random)")
    return normalize(ChaosCoefficients({m: SymmetricKernel(m, entries)}, max_level=m))


def path_kappa4_tridiagonal(n: int) -> float:
    """``48 sum lambda^4`` for the normalized level-2 path kernel on ``{1..n}``."""
    a = 1.0 / math.sqrt(4.0 * (n - 1))
    lam = eigvalsh_tridiagonal(np.zeros(n), np.full(n - 1, a))
    return 48.0 * float(np.sum(lam ** 4))


def complete_kappa4(n: int) -> float:
    """Closed form for the normalized level-2 complete kernel: ``48 a^4 ((n-1)^4 + n - 1)``."""
    a2 = 1.0 / (2.0 * n * (n - 1))
    return 48.0 * a2 * a2 * ((n - 1) ** 4 + (n - 1))


# -------------------------------------------------------------------- bounds

def burkholder_M(dist, p: int, b_p: float | None = None) -> float:
    """``(sqrt(2) b_p E|Z|^p)^2`` with ``E|Z|^3`` for ``p = 3`` and ``E Z^4`` for ``p = 4``."""
    dist = get_distribution(dist)
    b_p = p - 1.0 if b_p is None else b_p
    if p == 3:
        mom = dist.abs3
    elif p == 4:
        mom = dist.moments(4)
    else:
        raise ValueError("p must be 3 or 4")
    return (math.sqrt(2.0) * b_p * mom) ** 2


def smooth_bound_rhs(c: ChaosCoefficients, distA, distB, f3_norm: float,
                     constants: BoundConstants | None = None) -> float:
    """``(1/3) ||f'''|| M3^3 N_0(c, M3)^2 eps0(c, M3)``."""
    constants = constants or BoundConstants()
    if f3_norm == 0 or c.is_zero():
        return 0.0
    b3 = constants.b_p(3)
    M3 = max(burkholder_M(distA, 3, b3), burkholder_M(distB, 3, b3))
    return f3_norm / 3.0 * M3 ** 3 * weighted_norm(c, 0, M3) ** 2 * eps0(c, M3)[0]


def smooth_bound4_rhs(c: ChaosCoefficients, distA, distB, f4_norm: float,
                      constants: BoundConstants | None = None) -> float:
    """``(1/12) ||f''''|| M4^4 N_0(c, M4)^2 eps0(c, M4)^2``; both laws need ``E Z^3 = 0``."""
    constants = constants or BoundConstants()
    for d in (get_distribution(distA), get_distribution(distB)):
        if d.moments(3) != 0.0:
            raise ThirdMomentNonzero(f"{d.name}: E Z^3 = {d.moments(3)}")
    if f4_norm == 0 or c.is_zero():
        return 0.0
    b4 = constants.b_p(4)
    M4 = max(burkholder_M(distA, 4, b4), burkholder_M(distB, 4, b4))
    return f4_norm / 12.0 * M4 ** 4 * weighted_norm(c, 0, M4) ** 2 * eps0(c, M4)[0] ** 2


def _require_normalized(c, tol=1e-9):
    i = series_second_moment(c)
    if abs(i - 1.0) > tol:
        raise NotNormalized(f"i_N = {i!r}; the bound assumes i_N = 1")


def fourth_moment_bound_rhs(c: ChaosCoefficients, f_norm: float = 1.0, N: int | None = None,
                            variant: str = "auto") -> float:
    """``3 ||f|| N^3 (2N)! (N!)^3 sum_l kappa_{4,l}^{1/4}``, or with ``kappa^{1/2}``.

    ``variant`` is ``"G1"`` (quarter powers), ``"G2"`` (half powers, only when
    level 1 vanishes) or ``"auto"`` (the smaller admissible one).
    """
    _require_normalized(c)
    N = c.max_level if N is None else N
    kap = [kappa4(c, l) for l in range(1, N + 1)]
    pref = 3.0 * f_norm * N ** 3 * factorial(2 * N) * factorial(N) ** 3
    g1 = pref * sum(k ** 0.25 for k in kap)
    no_level1 = level_norm(c, 1) == 0.0
    if variant == "G1":
        return g1
    g2 = pref * sum(k ** 0.5 for k in kap)
    if variant == "G2":
        if not no_level1:
            raise ValueError("the half-power variant requires c = 0 on level 1")
        return g2
    if variant != "auto":
        raise ValueError("variant must be G1, G2 or auto")
    return min(g1, g2) if no_level1 else g1


def tv_bound_factors(c: ChaosCoefficients, constants: BoundConstants | None = None,
                     m_r: float = 1.0, r: float = 1.0, f_norm: float = 1.0, N: int | None = None,
                     kappa_override: float | None = None, delta_override: float | None = None,
                     alpha_override: float | None = None) -> dict:
    """Computable factors of the total-variation bounds and their assembled products.

    ``assembled`` uses ``kappa_bar^p + delta_bar`` (weighted ``delta_bar``);
    ``assembled_alt`` uses ``(kappa_bar + delta_bar)^p``; the two coincide for ``p = 1``.
    The ``*_override`` arguments replace the computed diagnostics (for sensitivity runs).
    """
    k = constants or BoundConstants()
    N = c.max_level if N is None else N
    i = series_second_moment(c)
    kb = kappa_bar(c) if kappa_override is None else kappa_override
    db_w = influence_profile(c, weighted=True) if delta_override is None else delta_override
    db_u = influence_profile(c, weighted=False)
    alpha = min_active_level_norm(c) if alpha_override is None else alpha_override
    a9_lhs = sum(factorial(l) * l * influence(c, l) ** 2 for l in range(1, N + 1))
    a9_ok = a9_lhs <= i / 4.0
    if not a9_ok:
        warnings.warn(f"sum l! l delta_l^2 = {a9_lhs:.6g} exceeds i_N/4 = {i / 4:.6g}",
                      HypothesisA9Violated, stacklevel=2)
    f = {
        "mr_r_factor": (m_r * r) ** (-k.d_star),
        "M_star_N": k.M_star ** N,
        "N_c_star": float(N) ** k.c_star,
        "N_fact_3p": factorial(N) ** (3 * k.p_star),
        "kappa_bar_p": kb ** k.p_star,
        "delta_bar_weighted": db_w,
        "delta_bar_unweighted": db_u,
        "alpha_term": (1.0 + 1.0 / alpha) * kb if kb else 0.0,
    }
    core = k.C_star * f["mr_r_factor"] * f["M_star_N"] * f["N_c_star"] * f["N_fact_3p"] * f_norm
    structural = N ** 3 * factorial(2 * N) * factorial(N) ** 3
    gauss_pref = k.C_star * f_norm / (r * m_r) ** k.d_star * structural
    return {
        "N": N,
        "i_N": i,
        "kappa_bar": kb,
        "alpha_N": alpha,
        "factors": f,
        "assembled": core * (f["kappa_bar_p"] + db_w),
        "assembled_alt": core * (kb + db_w) ** k.p_star,
        "gaussian_limit": gauss_pref * (kb + db_w),
        "gaussian_limit_alpha": gauss_pref * f["alpha_term"],
        "A9": {"lhs": a9_lhs, "rhs": i / 4.0, "ok": a9_ok},
        "exponent_note": "kappa_bar^p + delta_bar as stated; (kappa_bar + delta_bar)^p reported as assembled_alt",
    }


def tail_uniformity(c: ChaosCoefficients, N_cut: int) -> float:
    """``sum_{k >= N_cut} k k! |c|_k^2``."""
    return sum(k * factorial(k) * level_norm(c, k) ** 2 for k in c.levels if k >= N_cut)


# -------------------------------------------------------------- experiments

@dataclass
class ExperimentTable:
    header: dict
    rows: list

    def to_json(self) -> str:
        return json.dumps({"header": self.header, "rows": self.rows}, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.rows:
            w = csv.DictWriter(buf, fieldnames=list(self.rows[0]), lineterminator="\n")
            w.writeheader()
            for row in self.rows:
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return buf.getvalue()


def clt_experiment(family: str, m: int, n_values, dist="gaussian", seed: int = 0,
                   samples: int = 10 ** 5, shards: int = 1, workers: int | None = None) -> ExperimentTable:
    """Per ``n``: exact ``kappa_{4,m}``, ``delta_m``, and the sampled Kolmogorov distance and ``kappa4``.

    Every cell reuses ``seed`` so differences between rows come from the kernel only.
    """
    rows = []
    for n in n_values:
        c = generate_family(KernelFamily(family, m, n, seed))
        row = {"family": family, "m": m, "n": int(n),
               "kappa4": kappa4(c, m), "delta": influence(c, m)}
        if m == 2 and family == "path":
            row["kappa4_eigen"] = path_kappa4_tridiagonal(n)
        elif m == 2 and family == "complete":
            row["kappa4_closed_form"] = complete_kappa4(n)
        batch = sample_series(c, dist, seed, samples, shards, workers)
        row["kolmogorov"] = kolmogorov_distance(batch, normal_cdf(1.0))
        if samples >= 1000:
            est = empirical_kappa4(batch)
            row["kappa4_hat"], row["kappa4_se"] = est.value, est.se
        rows.append(row)
    header = {"experiment": "clt", "family": family, "m": m, "dist": get_distribution(dist).name,
              "seed": seed, "shards": shards, "samples": samples}
    return ExperimentTable(header, rows)
