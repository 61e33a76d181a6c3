"""Paired-arm n-sweeps comparing the dual-penalty estimator with the
nuclear-only baseline.

Config files are YAML mappings; see ``README.md`` for the full grammar.
Every (n, trial) cell draws one dataset with seed
``derive_seed(seed, n, trial)`` and fits both arms on it.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from simkernel.bounds import (
    BoundInputs,
    better_bound,
    klt_rhs,
    rate_slope,
    sample_size_ok,
    t_nm,
    theorem_main_rhs,
    worse_bound,
)
from simkernel.estimator import (
    EstimatorConfig,
    choose_epsbar,
    choose_epsilon,
    choose_s_rate,
    error_l2,
    fit,
)
from simkernel.graph import generate, laplacian, make_smoothing, rate_normalizing_d
from simkernel.kernels import coherence_function, make_target, sobolev_norm_sq
from simkernel.rng import derive_seed
from simkernel.sampling import design_stat, sample_dataset

log = logging.getLogger(__name__)

ARMS = ("dual", "baseline")
THREADS_ENV = "SIMKERNEL_THREADS"

DEFAULT_CONFIG: Dict[str, Any] = {
    "graph": {"kind": "cycle", "m": 100},
    "kernel": {"terms": [[2, 1.0]], "scale_to": 0.9},
    "smoothing": {"d": "rate", "p": 1.0},
    "n_grid": [500, 1000, 2000, 4000, 8000, 16000],
    "trials": 20,
    "t": math.log(10.0),
    "zeta": 1.0,
    "beta": 1.0,
    "nu": "weak",
    "s": "rate",
    "seed": 20240601,
    "estimator": {"max_iters": 5000, "tol_obj": 1e-10, "tol_kkt": None},
    "output": {"json": None, "csv": None, "plot": None},
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def apply_override(cfg: dict, assignment: str) -> dict:
    """Apply ``"a.b.c=value"``; the value is parsed as YAML."""
    if "=" not in assignment:
        raise ValueError(f"override {assignment!r} is not of the form key=value")
    key, raw = assignment.split("=", 1)
    value = yaml.safe_load(raw)
    out = copy.deepcopy(cfg)
    node = out
    parts = key.strip().split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ValueError(f"cannot override inside non-mapping key {p!r}")
    node[parts[-1]] = value
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    graph: Dict[str, Any]
    kernel: Dict[str, Any]
    smoothing: Dict[str, Any]
    n_grid: List[int]
    trials: int
    t: float
    zeta: float
    beta: float
    nu: Any
    s: Any
    seed: int
    estimator: Dict[str, Any]
    output: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be nonempty and strictly ascending")
        if self.t <= 0:
            raise ValueError("t must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        merged = _merge(DEFAULT_CONFIG, data or {})
        unknown = set(merged) - set(DEFAULT_CONFIG)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged["n_grid"] = [int(n) for n in merged["n_grid"]]
        merged["trials"] = int(merged["trials"])
        merged["seed"] = int(merged["seed"])
        for k in ("t", "zeta", "beta"):
            merged[k] = float(merged[k])
        return cls(**merged)

    @classmethod
    def load(cls, path, overrides=()) -> "ExperimentConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        for o in overrides:
            data = apply_override(_merge(DEFAULT_CONFIG, data), o)
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentReport:
    config: Dict[str, Any]
    setup: Dict[str, Any]
    records: List[Dict[str, Any]]
    aggregates: List[Dict[str, Any]]
    slopes: Dict[str, float]
    bounds: List[Dict[str, Any]]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, allow_nan=True) + "\n"

    def records_csv(self) -> str:
        cols = ["n", "trial", "arm", "seed", "dataset_sha256", "epsilon", "epsbar",
                "error_l2", "kkt_residual", "iterations", "converged"]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for rec in self.records:
            w.writerow(rec)
        return buf.getvalue()

    def aggregate(self, n: int, arm: str) -> Dict[str, Any]:
        for a in self.aggregates:
            if a["n"] == n and a["arm"] == arm:
                return a
        raise KeyError((n, arm))


def build_problem(cfg: ExperimentConfig):
    """Graph, smoothing operator, target kernel and oracle diagnostics."""
    gspec = dict(cfg.graph)
    kind = gspec.pop("kind")
    g = generate(kind, **gspec)
    p = float(cfg.smoothing.get("p", 1.0))
    d = cfg.smoothing.get("d", "rate")
    d = rate_normalizing_d(g.m, p) if d == "rate" else float(d)
    W = make_smoothing(laplacian(g), d, p)
    terms = [(int(i), float(w)) for i, w in cfg.kernel["terms"]]
    kernel = make_target(W.decomposition, terms, float(cfg.kernel.get("scale_to", 0.9)))
    profile = coherence_function(kernel, W)
    return g, W, kernel, profile


def _cell(args):
    n, trial, seed, S, W, eps, epsbar, est = args
    ds = sample_dataset(S, n, seed)
    B = design_stat(ds)
    digest = ds.digest()
    out = []
    for arm, eb in zip(ARMS, (epsbar, 0.0)):
        res = fit(B, EstimatorConfig(eps, eb, W, **est))
        out.append({
            "n": n, "trial": trial, "arm": arm, "seed": seed, "dataset_sha256": digest,
            "epsilon": eps, "epsbar": eb, "error_l2": error_l2(res.S_hat, S),
            "kkt_residual": res.kkt_residual, "iterations": res.iterations,
            "converged": bool(res.converged),
        })
    return out


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Run every (n, trial) cell for both arms and aggregate.

    The report depends only on ``cfg``: cells are merged in (n, trial, arm)
    order whatever the worker count.
    """
    g, W, kernel, profile = build_problem(cfg)
    m = g.m
    r = kernel.rank
    sob = sobolev_norm_sq(kernel.S, W, normalized=True)
    nu = profile.nu_weak if cfg.nu == "weak" else float(cfg.nu)
    est = {k: v for k, v in cfg.estimator.items() if v is not None}

    per_n = {}
    for n in cfg.n_grid:
        tn = t_nm(n, m, cfg.t, cfg.zeta)
        if not sample_size_ok(n, m, cfg.t, cfg.zeta):
            log.warning("n=%d violates m * t_nm <= n (m t_nm = %.1f)", n, m * tn)
        eps = choose_epsilon(n, m, cfg.t)
        if cfg.s == "rate":
            s = choose_s_rate(n, m, tn, nu, r, cfg.beta, sob, k0=W.k0)
        else:
            s = int(cfg.s)
        per_n[n] = {"t_nm": tn, "epsilon": eps, "s": s, "epsbar": choose_epsbar(W, s),
                    "sample_size_ok": sample_size_ok(n, m, cfg.t, cfg.zeta)}

    jobs = [(n, trial, derive_seed(cfg.seed, n, trial), kernel.S, W,
             per_n[n]["epsilon"], per_n[n]["epsbar"], est)
            for n in cfg.n_grid for trial in range(cfg.trials)]
    nworkers = _workers() if workers is None else workers
    if nworkers > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            results = list(pool.map(_cell, jobs))
    else:
        results = [_cell(j) for j in jobs]
    records = [rec for cell in results for rec in cell]
    for rec in records:
        if not rec["converged"]:
            log.warning("n=%d trial=%d arm=%s did not converge (kkt=%.3g)",
                        rec["n"], rec["trial"], rec["arm"], rec["kkt_residual"])

    aggregates = []
    for n in cfg.n_grid:
        for arm in ARMS:
            errs = np.array([x["error_l2"] for x in records if x["n"] == n and x["arm"] == arm])
            aggregates.append({
                "n": n, "arm": arm, "median_error": float(np.median(errs)),
                "mean_error": float(np.mean(errs)), "q25": float(np.quantile(errs, 0.25)),
                "q75": float(np.quantile(errs, 0.75)),
                "converged_fraction": float(np.mean([x["converged"] for x in records
                                                     if x["n"] == n and x["arm"] == arm])),
            })
    slopes = {}
    for arm in ARMS:
        pts = [(a["n"], a["median_error"]) for a in aggregates if a["arm"] == arm]
        slopes[arm] = rate_slope(pts) if len(pts) >= 4 and all(e > 0 for _, e in pts) else float("nan")

    bounds = []
    for n in cfg.n_grid:
        info = per_n[n]
        base_inp = dict(n=n, m=m, t=cfg.t, zeta=cfg.zeta, r=r, profile=profile,
                        sobolev_norm_sq=sob, max_diag_coherence=profile.max_diag_coherence,
                        nu=nu, beta=cfg.beta)
        dual_inp = BoundInputs(epsbar=info["epsbar"], **base_inp)
        nuc_inp = BoundInputs(epsbar=0.0, **base_inp)
        bounds.append({
            "n": n,
            "theorem_main_dual": theorem_main_rhs(dual_inp, info["s"]),
            "theorem_main_baseline": theorem_main_rhs(nuc_inp, m + 1),
            "worse_bound": worse_bound(nuc_inp),
            "better_bound": better_bound(dual_inp),
            "klt": klt_rhs(info["epsilon"], r, m),
        })

    setup = {
        "m": m, "rank": r, "k0": W.k0, "lambda_max": W.lambda_max, "d": W.d, "p": W.p,
        "sobolev_norm_sq": sob, "nu": nu, "nu_weak": profile.nu_weak,
        "max_diag_coherence": profile.max_diag_coherence,
        "per_n": [{"n": n, **per_n[n]} for n in cfg.n_grid],
    }
    return ExperimentReport(cfg.to_dict(), setup, records, aggregates, slopes, bounds)


def emit_plot_data(report: ExperimentReport) -> str:
    """CSV with columns ``n, arm, median_error, q25, q75, bound_value``.

    ``bound_value`` is the main-theorem bound at the arm's own ``(s, epsbar)``
    (``s = m + 1``, ``epsbar = 0`` for the baseline) with unit constants.
    """
    if not report.aggregates:
        raise ValueError("report has no aggregates")
    bound_of = {}
    for b in report.bounds:
        bound_of[(b["n"], "dual")] = b["theorem_main_dual"]
        bound_of[(b["n"], "baseline")] = b["theorem_main_baseline"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "arm", "median_error", "q25", "q75", "bound_value"])
    for a in report.aggregates:
        w.writerow([a["n"], a["arm"], repr(a["median_error"]), repr(a["q25"]),
                    repr(a["q75"]), repr(bound_of.get((a["n"], a["arm"]), float("nan")))])
    return buf.getvalue()


def write_outputs(report: ExperimentReport, json_path=None, csv_path=None, plot_path=None):
    if json_path:
        with open(json_path, "w") as fh:
            fh.write(report.to_json())
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(report.records_csv())
    if plot_path:
        with open(plot_path, "w") as fh:
            fh.write(emit_plot_data(report))
