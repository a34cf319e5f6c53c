"""``chaos-lab`` command line.

Exit status: 0 on success, 1 on invalid input or invocation, 2 when a numerical
suite or check fails.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .contraction import kappa4, kappa_bar
from .errors import ChaosError, TooLarge
from .expansion import nl0_rhs, small_ball_rhs
from .experiments import (TEST_FUNCTIONS, BoundConstants, KernelFamily, clt_experiment,
                          fourth_moment_bound_rhs, generate_family, smooth_bound4_rhs,
                          smooth_bound_rhs, tv_bound_factors)
from .files import dump_report, load_kernel, report_header, save_kernel
from .kernels import (eps0, influence, influence_profile, level_norm, min_active_level_norm,
                      series_second_moment)
from .oracle import GAUSSIAN, exact_kappa4, level2_eigen_kappa4
from .sampling import (empirical_kappa4, get_distribution, kolmogorov_distance, normal_cdf,
                       sample_series, smooth_distance, verify_split)
from . import suites


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    v = os.environ.get("CHAOS_LAB_SEED")
    if v is None:
        return 0
    try:
        return int(v)
    except ValueError:
        raise ChaosError(f"CHAOS_LAB_SEED must be an integer, got {v!r}") from None


def _default_shards() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _float_list(s):
    return [float(x) for x in s.split(",") if x.strip()]


def _int_list(s):
    return [int(x) for x in s.split(",") if x.strip()]


# ---------------------------------------------------------------- commands

def cmd_gen(a):
    c = generate_family(KernelFamily(a.family, a.m, a.n, a.seed))
    meta = {"family": a.family, "m": a.m, "n": a.n, "seed": a.seed}
    if a.out:
        save_kernel(c, a.out, meta)
    else:
        from .files import kernel_to_json
        sys.stdout.write(kernel_to_json(c, meta))
    return 0


def _diagnostics(c, M_list):
    levels = {}
    for m in range(1, c.max_level + 1):
        levels[str(m)] = {"norm": level_norm(c, m), "delta": influence(c, m), "kappa4": kappa4(c, m)}
    alpha = min_active_level_norm(c)
    return {
        "levels": levels,
        "i_N": series_second_moment(c),
        "delta_bar": influence_profile(c, weighted=False),
        "delta_bar_weighted": influence_profile(c, weighted=True),
        "kappa_bar": kappa_bar(c),
        "alpha_N": alpha if math.isfinite(alpha) else None,
        "eps0": {repr(M): {"value": eps0(c, M)[0], "bound": eps0(c, M)[1]} for M in M_list},
    }


def cmd_diag(a):
    c = load_kernel(a.kernel)
    rep = {"header": report_header("diag", kernel=c), **_diagnostics(c, a.M)}
    _emit(dump_report(rep), a.out)
    return 0


def cmd_kappa(a):
    c = load_kernel(a.kernel)
    rows = {}
    for m in range(1, c.max_level + 1):
        row = {"contraction": kappa4(c, m)}
        if m in c.levels and a.oracle:
            from .kernels import ChaosCoefficients
            single = ChaosCoefficients({m: c.kernel(m)}, max_level=m)
            try:
                row["moment_oracle"] = exact_kappa4(single, GAUSSIAN)
            except TooLarge as e:
                row["moment_oracle"] = f"skipped: {e}"
            if m == 2:
                try:
                    row["eigen"] = level2_eigen_kappa4(c.kernel(2))
                except TooLarge as e:
                    row["eigen"] = f"skipped: {e}"
        rows[str(m)] = row
    rep = {"header": report_header("kappa", kernel=c), "kappa4": rows, "kappa_bar": kappa_bar(c)}
    _emit(dump_report(rep), a.out)
    return 0


def cmd_simulate(a):
    c = load_kernel(a.kernel)
    dist = get_distribution(a.dist)
    batch = sample_series(c, dist, a.seed, a.n, a.shards, workers=a.workers)
    x = batch.values
    i = series_second_moment(c)
    stats = {"mean": float(x.mean()), "var": float(x.var()), "mean_square": float(np.mean(x * x)),
             "i_N": i}
    if a.n >= 1000:
        est = empirical_kappa4(batch)
        stats["kappa4_hat"], stats["kappa4_se"] = est.value, est.se
    if i > 0:
        stats["kolmogorov_to_normal"] = kolmogorov_distance(batch, normal_cdf(math.sqrt(i)))
    counts, edges = np.histogram(x, bins=a.bins)
    header = report_header("simulate", a.seed, a.shards, c, dist=dist.name, n=a.n)
    if a.report == "csv":
        lines = ["# " + json.dumps(header, sort_keys=True), "key,value"]
        lines += [f"{k},{v!r}" for k, v in sorted(stats.items())]
        lines += ["", "bin_left,bin_right,count"]
        lines += [f"{edges[k]!r},{edges[k + 1]!r},{counts[k]}" for k in range(len(counts))]
        _emit("\n".join(lines) + "\n", a.out)
    else:
        rep = {"header": header, "stats": stats,
               "histogram": {"edges": edges.tolist(), "counts": counts.tolist()}}
        _emit(dump_report(rep), a.out)
    return 0


def _test_function(name):
    try:
        return TEST_FUNCTIONS[name]
    except KeyError:
        raise ChaosError(f"unknown test function {name!r}; known: {sorted(TEST_FUNCTIONS)}") from None


def cmd_delta(a):
    c = load_kernel(a.kernel)
    f, f3, f4 = _test_function(a.f)
    est, half = smooth_distance(c, a.distA, a.distB, f, a.seedA, a.seedB, a.n, a.shards)
    rhs = smooth_bound_rhs(c, a.distA, a.distB, f3)
    rep = {"header": report_header("delta", [a.seedA, a.seedB], a.shards, c,
                                   distA=a.distA, distB=a.distB, f=a.f, n=a.n),
           "estimate": est, "half_width": half, "smooth_bound": rhs,
           "bound_holds": est - half <= rhs}
    _emit(dump_report(rep), a.out)
    return 0 if rep["bound_holds"] else 2


def cmd_bounds(a):
    c = load_kernel(a.kernel)
    consts = BoundConstants()
    if a.constants:
        consts = BoundConstants.from_dict(json.loads(Path(a.constants).read_text()))
    f, f3, f4 = _test_function(a.f)
    out = {"smooth_bound": smooth_bound_rhs(c, a.distA, a.distB, f3, consts)}
    try:
        out["smooth_bound4"] = smooth_bound4_rhs(c, a.distA, a.distB, f4, consts)
    except ChaosError as e:
        out["smooth_bound4"] = f"not applicable: {e}"
    try:
        out["fourth_moment_G1"] = fourth_moment_bound_rhs(c, 1.0, variant="G1")
        out["fourth_moment"] = fourth_moment_bound_rhs(c, 1.0)
    except ChaosError as e:
        out["fourth_moment"] = f"not applicable: {e}"
    N = c.max_level
    if series_second_moment(c) > 0:
        out["small_ball"] = small_ball_rhs(c, N, a.p, a.m_r, consts.C_p)
    out["nl0"] = nl0_rhs(c, N, a.p, consts.C_p)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out["tv"] = tv_bound_factors(c, consts, a.m_r, a.r)
    rep = {"header": report_header("bounds", kernel=c, distA=a.distA, distB=a.distB, f=a.f), **out}
    _emit(dump_report(rep), a.out)
    return 0


def cmd_verify(a):
    ident = suites.identity_suite(a.cases, a.seed)
    ineq = suites.inequality_suite(a.instances, a.seed + 1)
    for row in ident["per_case"]:
        print(f"case {row['case']:3d}  R1 {row['R1']:.2e}  Sr {row['Sr']:.2e}  "
              f"Itilde2 {row['Itilde2']:.2e}  Itilde1 {row['Itilde1']:.2e}", file=sys.stderr)
    ok_ident = max(ident["max_rel_err"].values()) <= a.tol
    ok_ineq = ineq["violations"] == 0
    rep = {"header": report_header("verify", a.seed),
           "identities": {"max_rel_err": ident["max_rel_err"], "cases": ident["cases"],
                          "tolerance": a.tol, "ok": ok_ident},
           "inequalities": {k: v for k, v in ineq.items()}, "ok": ok_ident and ok_ineq}
    rep["inequalities"]["ok"] = ok_ineq
    _emit(dump_report(rep), a.out)
    return 0 if rep["ok"] else 2


def cmd_oracle_check(a):
    trip = suites.kappa_triple_suite(a.cases, a.seed)
    iso = suites.isometry_suite()
    ev = suites.evaluation_suite(seed=a.seed + 1)
    ok = (max(trip["max_rel_err"].values()) <= 1e-9
          and all(r["abs_err"] <= 1e-12 for r in iso.values()) and ev <= 1e-12)
    rep = {"header": report_header("oracle-check", a.seed), "kappa4": trip,
           "isometry": iso, "evaluation_max_rel_err": ev, "ok": ok}
    _emit(dump_report(rep), a.out)
    return 0 if ok else 2


def cmd_split_check(a):
    res = verify_split(a.dist, a.n, a.seed, a.seed + 1, doeblin=(a.z, a.r, a.eps))
    rep = {"header": report_header("split-check", a.seed, 1, None, dist=a.dist,
                                   doeblin=[a.z, a.r, a.eps], n=a.n),
           "statistic": res.statistic, "threshold": res.threshold,
           "chi_rate": res.chi_rate, "chi_prob": res.chi_prob, "ok": res.ok}
    _emit(dump_report(rep), a.out)
    return 0 if res.ok else 2


def cmd_experiment(a):
    if a.kind != "clt":
        raise ChaosError(f"unknown experiment {a.kind!r}")
    tab = clt_experiment(a.family, a.m, a.n_list, a.dist, a.seed, a.samples, a.shards, a.workers)
    tab.header["version"] = __version__
    if a.format == "csv":
        _emit("# " + json.dumps(tab.header, sort_keys=True) + "\n" + tab.to_csv(), a.out)
    else:
        _emit(dump_report({"header": tab.header, "rows": tab.rows}), a.out)
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chaos-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"chaos-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    seed = _default_seed()
    shards = _default_shards()

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", help="write the report here instead of stdout")
        return sp

    g = add("gen", cmd_gen, "generate a normalized kernel family")
    g.add_argument("--family", required=True, choices=["complete", "path", "random"])
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=seed)

    d = add("diag", cmd_diag, "scalar diagnostics of a kernel file")
    d.add_argument("--kernel", required=True)
    d.add_argument("--M", type=_float_list, default=[1.0], help="comma-separated M values for eps0")

    k = add("kappa", cmd_kappa, "fourth cumulants per level")
    k.add_argument("--kernel", required=True)
    k.add_argument("--oracle", action="store_true", help="also run the moment and eigenvalue oracles")

    s = add("simulate", cmd_simulate, "sample S(c, Z) and summarize")
    s.add_argument("--kernel", required=True)
    s.add_argument("--dist", default="gaussian")
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--n", type=int, default=100_000)
    s.add_argument("--shards", type=int, default=shards)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--bins", type=int, default=20)
    s.add_argument("--report", choices=["json", "csv"], default="json")

    dl = add("delta", cmd_delta, "estimate |E f(S_A) - E f(S_B)| against the smooth bound")
    dl.add_argument("--kernel", required=True)
    dl.add_argument("--distA", default="rademacher")
    dl.add_argument("--distB", default="gaussian")
    dl.add_argument("--f", default="sin")
    dl.add_argument("--n", type=int, default=100_000)
    dl.add_argument("--seedA", type=int, default=seed)
    dl.add_argument("--seedB", type=int, default=seed + 1)
    dl.add_argument("--shards", type=int, default=shards)

    b = add("bounds", cmd_bounds, "evaluate the explicit bounds for a kernel")
    b.add_argument("--kernel", required=True)
    b.add_argument("--distA", default="rademacher")
    b.add_argument("--distB", default="gaussian")
    b.add_argument("--f", default="sin")
    b.add_argument("--constants", help="JSON file with C_p, C_star, d_star, c_star, M_star, p_star, b")
    b.add_argument("--p", type=float, default=2.0)
    b.add_argument("--m-r", dest="m_r", type=float, default=1.0)
    b.add_argument("--r", type=float, default=1.0)

    v = add("verify", cmd_verify, "expansion identities and inequality suite")
    v.add_argument("--cases", type=int, default=100)
    v.add_argument("--instances", type=int, default=1000)
    v.add_argument("--seed", type=int, default=seed)
    v.add_argument("--tol", type=float, default=1e-10)

    o = add("oracle-check", cmd_oracle_check, "formula vs brute-force oracles")
    o.add_argument("--cases", type=int, default=200)
    o.add_argument("--seed", type=int, default=seed)

    sc = add("split-check", cmd_split_check, "two-sample test of the splitting sampler")
    sc.add_argument("--dist", default="gaussian")
    sc.add_argument("--z", type=float, default=0.0)
    sc.add_argument("--r", type=float, default=0.5)
    sc.add_argument("--eps", type=float, default=0.24)
    sc.add_argument("--n", type=int, default=100_000)
    sc.add_argument("--seed", type=int, default=seed)

    e = add("experiment", cmd_experiment, "convergence experiments")
    e.add_argument("kind", choices=["clt"])
    e.add_argument("--family", default="path", choices=["complete", "path", "random"])
    e.add_argument("--m", type=int, default=2)
    e.add_argument("--n-list", dest="n_list", type=_int_list, default=[10, 20, 50, 100, 200])
    e.add_argument("--samples", type=int, default=100_000)
    e.add_argument("--dist", default="gaussian")
    e.add_argument("--seed", type=int, default=seed)
    e.add_argument("--shards", type=int, default=shards)
    e.add_argument("--workers", type=int, default=None)
    e.add_argument("--format", choices=["json", "csv"], default="json")
    return p


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.fn(args)
    except (ValueError, FileNotFoundError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"chaos-lab: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
