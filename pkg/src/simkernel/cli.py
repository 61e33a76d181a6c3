"""Command-line interface: ``simkernel <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from simkernel import io as sio
from simkernel.bounds import (
    BoundInputs,
    corollary_rhs,
    better_bound,
    klt_rhs,
    lemma1_check,
    sample_size_ok,
    t_nm,
    theorem_main_rhs,
)
from simkernel.estimator import (
    EstimatorConfig,
    choose_epsbar,
    choose_epsilon,
    error_l2,
    fit,
    objective,
    t_from_confidence,
)
from simkernel.experiment import ExperimentConfig, run_experiment, write_outputs
from simkernel.graph import (
    SmoothingOperator,
    check_spectral_conditions,
    generate,
    laplacian,
    make_smoothing,
    rate_normalizing_d,
)
from simkernel.kernels import SimilarityKernel, coherence_function, make_target, sobolev_norm_sq
from simkernel.sampling import design_stat, sample_dataset, verify_xi_concentration, violation_allowance


def _smoothing(args, g=None) -> SmoothingOperator:
    if getattr(args, "w_matrix", None):
        return SmoothingOperator.from_matrix(sio.read_symmat(args.w_matrix))
    if g is None:
        g = sio.read_graph(args.graph)
    d = rate_normalizing_d(g.m, args.p) if args.d == "rate" else float(args.d)
    return make_smoothing(laplacian(g), d, args.p)


def _add_smoothing_args(p):
    p.add_argument("--graph", help="graph file")
    p.add_argument("--w-matrix", help="load W directly from a symmat file instead of a graph")
    p.add_argument("--d", default="1", help="scale d in W = d*Laplacian^p, or 'rate'")
    p.add_argument("--p", type=float, default=1.0, help="power p in W = d*Laplacian^p")


def _t(args) -> float:
    if args.confidence is not None:
        return t_from_confidence(args.confidence)
    return args.t


def _dump(obj, path):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_gen_graph(args):
    g = generate(args.kind, args.m, a=args.a, b=args.b, prob=args.prob, seed=args.seed)
    sio.write_graph(args.out, g)
    print(f"wrote graph m={g.m} edges={len(g.edges)} to {args.out}")


def _parse_terms(text: str):
    terms = []
    for part in text.split(","):
        idx, w = part.split(":")
        terms.append((int(idx), float(w)))
    return terms


def cmd_make_kernel(args):
    W = _smoothing(args)
    kernel = make_target(W.decomposition, _parse_terms(args.terms), args.scale_to)
    sio.write_symmat(args.out, kernel.S)
    print(f"wrote rank-{kernel.rank} kernel (m={kernel.m}) to {args.out}")


def cmd_simulate(args):
    S = sio.read_symmat(args.kernel)
    if args.graph:
        g = sio.read_graph(args.graph)
        if g.m != S.shape[0]:
            raise SystemExit("graph and kernel dimensions differ")
    ds = sample_dataset(SimilarityKernel.from_matrix(S), args.n, args.seed)
    sio.write_dataset(args.out, ds)
    print(f"wrote {ds.n} observations to {args.out} (sha256 {ds.digest()[:12]})")


def cmd_estimate(args):
    ds = sio.read_dataset(args.dataset)
    W = _smoothing(args)
    m = W.m
    if ds.m != m:
        raise SystemExit(f"dataset has m={ds.m} but W has m={m}")
    t = _t(args)
    eps = choose_epsilon(ds.n, m, t) if args.epsilon == "auto" else float(args.epsilon)
    if args.epsbar is not None:
        epsbar = args.epsbar
    elif args.epsbar_s is not None:
        epsbar = choose_epsbar(W, args.epsbar_s)
    else:
        epsbar = 0.0
    cfg = EstimatorConfig(eps, epsbar, W, max_iters=args.max_iters, tol_kkt=args.tol_kkt)
    B = design_stat(ds)
    res = fit(B, cfg)
    sio.write_symmat(args.out, res.S_hat)
    report = {
        "epsilon": eps, "epsbar": epsbar, "t": t, "n": ds.n, "m": m,
        "iterations": res.iterations, "kkt_residual": res.kkt_residual,
        "converged": res.converged, "objective": objective(res.S_hat, B, cfg),
        "rank": int(np.sum(np.abs(np.linalg.eigvalsh(res.S_hat)) > 1e-8 * max(np.abs(res.S_hat).max(), 1e-300))),
    }
    if args.oracle:
        report["error_l2"] = error_l2(res.S_hat, sio.read_symmat(args.oracle))
    _dump(report, args.report)


def cmd_check_bounds(args):
    W = _smoothing(args)
    kernel = SimilarityKernel.from_matrix(sio.read_symmat(args.kernel))
    m = W.m
    t = _t(args)
    spec = check_spectral_conditions(W, args.zeta)
    prof = coherence_function(kernel, W)
    sob = sobolev_norm_sq(kernel.S, W, normalized=True)
    tn = t_nm(args.n, m, t, args.zeta)
    eps = choose_epsilon(args.n, m, t)
    if args.s_grid == "all":
        s_values = list(range(W.k0 + 1, m + 2))
    else:
        s_values = [int(x) for x in args.s_grid.split(",")]
    rows = []
    for s in s_values:
        epsbar = choose_epsbar(W, s)
        inp = BoundInputs(args.n, m, t, args.zeta, kernel.rank, prof, epsbar, sob,
                          prof.max_diag_coherence, nu=prof.nu_weak, beta=args.beta)
        row = {"s": s, "epsbar": epsbar,
               "theorem_main": theorem_main_rhs(inp, s, W),
               "corollary": corollary_rhs(inp, s, W)}
        if s <= m and not math.isnan(spec.min_c_sum):
            lc = lemma1_check(prof, W, None, s - 1, spec.min_c_sum)
            row["lemma1"] = {"lhs": lc.lhs, "rhs": lc.rhs, "ok": lc.ok}
        rows.append(row)
    inp0 = BoundInputs(args.n, m, t, args.zeta, kernel.rank, prof, 0.0, sob,
                       prof.max_diag_coherence, nu=prof.nu_weak, beta=args.beta)
    out = {
        "n": args.n, "m": m, "t": t, "zeta": args.zeta, "t_nm": tn,
        "sample_size_ok": sample_size_ok(args.n, m, t, args.zeta), "epsilon": eps,
        "spectral": {"k0": spec.k0, "zeta_ok": spec.zeta_ok, "min_c_sum": spec.min_c_sum,
                     "min_c_ratio": spec.min_c_ratio, "monotone_ok": spec.monotone_ok},
        "coherence": {"rank": prof.rank, "nu_weak": prof.nu_weak,
                      "nu_pointwise": prof.nu_pointwise, "nu_sign": prof.nu_sign,
                      "max_diag_coherence": prof.max_diag_coherence,
                      "phi_bar": prof.phi_bar.tolist()},
        "sobolev_norm_sq": sob,
        "klt": klt_rhs(eps, max(kernel.rank, 1), m),
        "better_bound": better_bound(inp0) if sob > 0 else 0.0,
        "by_s": rows,
    }
    _dump(out, args.out)


def cmd_verify_concentration(args):
    S = sio.read_symmat(args.kernel)
    t = _t(args)
    rate, bound = verify_xi_concentration(S, args.n, t, args.trials, args.seed)
    allow = violation_allowance(t, args.trials)
    _dump({"n": args.n, "m": S.shape[0], "t": t, "trials": args.trials, "bound": bound,
           "violation_rate": rate, "allowed_rate": allow, "ok": rate <= allow}, args.out)


def cmd_sweep(args):
    overrides = list(args.set or [])
    for key in ("trials", "seed"):
        if getattr(args, key) is not None:
            overrides.append(f"{key}={getattr(args, key)}")
    if args.config:
        cfg = ExperimentConfig.load(args.config, overrides)
    else:
        from simkernel.experiment import DEFAULT_CONFIG, apply_override
        data = DEFAULT_CONFIG
        for o in overrides:
            data = apply_override(data, o)
        cfg = ExperimentConfig.from_dict(data)
    report = run_experiment(cfg, workers=args.workers)
    out = cfg.output
    write_outputs(report, args.out or out.get("json"), args.csv or out.get("csv"),
                  args.plot or out.get("plot"))
    for arm, slope in report.slopes.items():
        print(f"{arm}: log-log slope {slope:.3f}")
    for a in report.aggregates:
        print(f"n={a['n']:>7d} {a['arm']:<8s} median={a['median_error']:.5g}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simkernel", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="write a test-bed graph")
    p.add_argument("--kind", required=True,
                   choices=["path", "cycle", "grid", "complete", "erdos_renyi"])
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--a", type=int, default=0, help="grid rows")
    p.add_argument("--b", type=int, default=0, help="grid columns")
    p.add_argument("--prob", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("make-kernel", help="build a target kernel from W's eigenvectors")
    _add_smoothing_args(p)
    p.add_argument("--terms", required=True, help="comma list of index:weight (1-based)")
    p.add_argument("--scale-to", type=float, default=0.9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_kernel)

    p = sub.add_parser("simulate", help="sample labelled pairs from a kernel")
    p.add_argument("--graph")
    p.add_argument("--kernel", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="fit the penalized estimator")
    p.add_argument("--dataset", required=True)
    _add_smoothing_args(p)
    p.add_argument("--epsilon", default="auto")
    p.add_argument("--epsbar", type=float)
    p.add_argument("--epsbar-s", type=int, help="use epsbar = 1/lambda_s")
    p.add_argument("--t", type=float, default=math.log(10.0))
    p.add_argument("--confidence", type=float, help="sets t = log(1/(1-confidence))")
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--tol-kkt", type=float)
    p.add_argument("--oracle", help="true kernel, for reporting error_l2")
    p.add_argument("--out", required=True)
    p.add_argument("--report", default="-")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("check-bounds", help="evaluate bounds and spectral diagnostics")
    _add_smoothing_args(p)
    p.add_argument("--kernel", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, default=math.log(10.0))
    p.add_argument("--confidence", type=float)
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--s-grid", default="all")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_check_bounds)

    p = sub.add_parser("verify-concentration", help="Monte Carlo check of the noise bound")
    p.add_argument("--kernel", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, default=3.0)
    p.add_argument("--confidence", type=float)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify_concentration)

    p = sub.add_parser("sweep", help="run a paired-arm n-sweep experiment")
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config entry, e.g. graph.m=50 (repeatable)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default: $SIMKERNEL_THREADS or 1)")
    p.add_argument("--out", help="report JSON")
    p.add_argument("--csv", help="per-record CSV")
    p.add_argument("--plot", help="plot-data CSV")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if hasattr(args, "graph") and args.func is not cmd_simulate and args.func is not cmd_gen_graph:
        if not args.graph and not getattr(args, "w_matrix", None):
            raise SystemExit("one of --graph or --w-matrix is required")
    args.func(args)


if __name__ == "__main__":
    main()
