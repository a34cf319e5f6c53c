"""Acceptance criteria 1-11; each test prints one PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from chaos_lab.cli import main
from chaos_lab.contraction import check_contraction_inequalities, kappa4, kappa_bar
from chaos_lab.errors import InvalidDoeblin
from chaos_lab.experiments import (TEST_FUNCTIONS, KernelFamily, generate_family,
                                   path_kappa4_tridiagonal, smooth_bound_rhs)
from chaos_lab.files import save_kernel
from chaos_lab.kernels import influence, series_second_moment
from chaos_lab.sampling import (bump, bump_scaling_check, empirical_kappa4, kolmogorov_distance,
                                normal_cdf, sample_series, smooth_distance, split_sampler,
                                verify_split)
from chaos_lab.suites import (fixtures, identity_suite, inequality_suite, isometry_suite,
                              kappa_triple_suite, random_kernel)

from conftest import ACCEPTANCE_LINES


def report(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_c01_kappa_triples():
    t0 = time.perf_counter()
    out = kappa_triple_suite(n_cases=200, seed=1)
    dt = time.perf_counter() - t0
    worst = max(out["max_rel_err"].values())
    report(1, worst <= 1e-9 and dt < 30,
           f"cumulant triple agreement, max rel err {worst:.2e} over 200 kernels in {dt:.1f}s")


def test_c02_level1_gaussian():
    rng = np.random.default_rng(21)
    vals = [kappa4(random_kernel(rng, [1], int(rng.integers(1, 20))), 1) for _ in range(100)]
    report(2, all(v == 0.0 for v in vals), f"kappa_4,1 == 0 on 100 level-1 kernels (max {max(vals)})")


def test_c03_isometry():
    out = isometry_suite(max_J=12)
    worst = max(r["abs_err"] for r in out.values())
    report(3, len(out) == len(fixtures()) and worst <= 1e-12,
           f"isometry vs sign enumeration on {len(out)} fixtures, max abs err {worst:.1e}")


def test_c04_fixture_arithmetic():
    c = fixtures()["complete23"]
    i = series_second_moment(c)
    d = influence(c, 2)
    k = kappa4(c, 2)
    kb = kappa_bar(c)
    ok = (abs(i - 1) <= 1e-12 and abs(d - 1 / math.sqrt(6)) <= 1e-12
          and abs(k - 6) <= 1e-9 and abs(kb - 6 ** 0.25) <= 1e-9)
    report(4, ok, f"i_N={i:.15f} delta_2={d:.15f} kappa_4,2={k:.12f} kappa_bar={kb:.12f}")


def test_c05_identities():
    t0 = time.perf_counter()
    out = identity_suite(n_cases=100, seed=2, max_support=5, max_level=3)
    dt = time.perf_counter() - t0
    e = out["max_rel_err"]
    report(5, e["R1"] <= 1e-10 and e["Itilde2"] <= 1e-10 and dt < 60,
           f"R1 {e['R1']:.1e}, Itilde2 {e['Itilde2']:.1e} (Sr {e['Sr']:.1e}, Itilde1 {e['Itilde1']:.1e}) "
           f"over 100 cases in {dt:.1f}s")


def test_c06_inequalities():
    out = inequality_suite(n_instances=1000, seed=3, slack=1e-12)
    report(6, out["violations"] == 0,
           f"{out['records']} inequality records on 1000 instances, {out['violations']} violations, "
           f"max scaled excess {out['max_violation']:.1e}")


def test_c07_smooth_bound():
    t0 = time.perf_counter()
    f, f3, _ = TEST_FUNCTIONS["sin"]
    bad = []
    worst_ratio = 0.0
    for i, (name, c) in enumerate(fixtures().items()):
        est, half = smooth_distance(c, "rademacher", "gaussian", f, 100 + i, 200 + i, 10 ** 5)
        rhs = smooth_bound_rhs(c, "rademacher", "gaussian", f3)
        worst_ratio = max(worst_ratio, (est - half) / rhs)
        if est - half > rhs:
            bad.append(name)
    dt = time.perf_counter() - t0
    report(7, not bad and dt < 120,
           f"smooth bound on 20 fixtures, max (est-3sd)/rhs {worst_ratio:.2e}, failures {bad} in {dt:.1f}s")


def test_c08_clt_experiment():
    ns = [10, 20, 50, 100, 200]
    kap, gap, kol = [], 0.0, {}
    for n in ns:
        c = generate_family(KernelFamily("path", 2, n))
        k = kappa4(c, 2)
        gap = max(gap, abs(k - path_kappa4_tridiagonal(n)) / k)
        kap.append(k)
        if n in (20, 200):
            kol[n] = kolmogorov_distance(sample_series(c, "gaussian", 0, 10 ** 5), normal_cdf())
    decreasing = all(a > b for a, b in zip(kap, kap[1:]))
    comp = generate_family(KernelFamily("complete", 2, 100))
    est = empirical_kappa4(sample_series(comp, "gaussian", 0, 10 ** 6, shards=4))
    ok = (decreasing and gap <= 1e-9 and kol[200] < kol[20] and kol[200] < 0.05
          and est.value - 5 * est.se > 10)
    report(8, ok, f"path kappa4 {[round(k, 5) for k in kap]} (eigen gap {gap:.1e}), "
                  f"KS n=20 {kol[20]:.4f} n=200 {kol[200]:.4f}; complete n=100 "
                  f"kappa4_hat {est.value:.3f} +- {est.se:.3f}")


def test_c09_splitting():
    chk = verify_split("gaussian", 10 ** 5, 1, 2, doeblin=(0.0, 0.5, 0.24))
    try:
        split_sampler("rademacher", 0, 100)
        rejected = False
    except InvalidDoeblin:
        rejected = True
    ok = chk.statistic <= 0.012 and rejected and 0.339 < chk.chi_prob < 0.48
    report(9, ok, f"KS {chk.statistic:.5f} <= 0.012, rademacher rejected={rejected}, "
                  f"P(chi=1)={chk.chi_prob:.5f} (observed {chk.chi_rate:.5f})")


def test_c10_bump():
    ok = True
    rs = (0.1, 0.5, 1.0, 2.0)
    for r in rs:
        p = bump(r)
        edge = p.psi(np.array([r, -r, r * (1 + 1e-13)]))
        ok &= bool(np.all(np.abs(edge - 1.0) <= 1e-12))
        out = p.psi(np.array([2 * r, -2 * r, 2.5 * r, 10 * r]))
        ok &= bool(np.all(out == 0.0))
    m = bump(0.5).m_r
    ok &= 1.41421 < m < 2
    sc = bump_scaling_check(rs=rs)
    spread = max(max(v) / min(v) - 1.0 for v in sc.values())
    finite = all(np.isfinite(v).all() for v in sc.values())
    ok &= finite and spread < 1e-3
    report(10, ok, f"psi continuous at |t|=r, support in [-2r,2r], m_0.5={m:.5f}, "
                   f"scaling sups {{{', '.join(f'{k}: {v[0]:.4g}' for k, v in sc.items())}}} "
                   f"r-spread {spread:.1e}")


def test_c11_reproducible(tmp_path, capsys):
    k = tmp_path / "k.json"
    save_kernel(fixtures()["mixed123"], k)
    runs = [
        ["simulate", "--kernel", str(k), "--n", "50000", "--seed", "5", "--shards", "3"],
        ["simulate", "--kernel", str(k), "--n", "50000", "--seed", "5", "--shards", "3", "--report", "csv"],
        ["experiment", "clt", "--family", "path", "--n-list", "10,50", "--samples", "20000",
         "--seed", "5", "--shards", "3"],
    ]
    same = True
    for argv in runs:
        outs = []
        for _ in range(2):
            assert main(argv) == 0
            outs.append(capsys.readouterr().out.encode())
        same &= outs[0] == outs[1] and len(outs[0]) > 0
    report(11, same, "simulate (json, csv) and experiment reports byte-identical on rerun")
