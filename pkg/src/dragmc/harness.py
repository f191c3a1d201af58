"""Experiment harness: configured runs, reports, and the comparison
figures.

A run is described by an ``ExperimentConfig``, resolved against per-problem
defaults (proposal scales tuned so each sampler sits near its best
rejection rate), executed with a seeded generator, and summarised into an
``ExperimentReport``.  With an output directory set, the report path writes
the post-burn-in chain as CSV, the report as JSON, and renders the chain's
autocorrelation as a figure next to them.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import ChainSummary, rejection_rate, summarize_chain
from .errors import ConfigurationError
from .kernels import (
    DragConfig,
    GaussianWalkProposal,
    KernelStats,
    drag_step,
    joint_step,
    marginal_step,
    single_var_step,
)
from .models import EvalCounts, initial_state
from .testbed import (
    PROBLEMS,
    discrete_drag_transition_matrix,
    discrete_target,
    make_discrete_model,
    test1_conditional_sample,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "RunResult",
    "run_chain",
    "run_experiment",
    "emit_figure1",
    "emit_acf_comparison",
    "db_check",
    "parse_method_spec",
    "default_iterations",
]

METHODS = ("joint", "single", "marginal", "drag")

# Near-optimal random-walk scales per (problem, method): (outer, inner).
# Outer drives the slow block (the x part of the joint proposal); inner
# drives the fast block.
_DEFAULT_SDS = {
    ("test1", "joint"): (0.5, 0.5),
    ("test1", "single"): (0.25, 0.25),
    ("test1", "marginal"): (1.0, None),
    ("test1", "drag"): (1.0, 0.2),
    ("test2", "joint"): (0.3, 0.3),
    ("test2", "single"): (0.25, 0.25),
    ("test2", "marginal"): (1.0, None),
    ("test2", "drag"): (1.0, 0.2),
}


def default_iterations(method: str, n: int | None = None) -> int:
    """10^5 outer iterations, except the very long ladders where 2 * 10^4
    already costs 10^7 inner updates."""
    if method == "drag" and n is not None and n >= 500:
        return 20_000
    return 100_000


@dataclass
class ExperimentConfig:
    problem: str = "test1"
    method: str = "drag"
    n: int | None = None
    outer_sd: object = None  # float or sequence; None picks the default
    inner_sd: object = None
    iterations: int | None = None
    burnin_fraction: float = 0.1
    seed: int = 0
    max_lag: int = 30
    out_dir: str | None = None
    slow_delay_us: float = 0.0


def _as_sds(value, d: int, flag: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if arr.size == 1:
        arr = np.full(d, arr[0])
    if arr.shape != (d,):
        raise ConfigurationError(f"{flag}: expected 1 or {d} values, got {arr.size}")
    return arr


@dataclass
class _Resolved:
    cfg: ExperimentConfig
    problem: object
    outer_sds: np.ndarray
    inner_sds: np.ndarray | None
    iterations: int
    burnin: int


def _resolve(cfg: ExperimentConfig) -> _Resolved:
    if cfg.problem not in PROBLEMS:
        raise ConfigurationError(f"problem: unknown name {cfg.problem!r}")
    problem = PROBLEMS[cfg.problem]
    if problem.kind != "continuous":
        raise ConfigurationError(
            f"problem: {cfg.problem!r} is enumeration-only; use the db-check command"
        )
    if cfg.method not in METHODS:
        raise ConfigurationError(f"method: unknown name {cfg.method!r}")
    if cfg.method == "drag":
        if cfg.n is None:
            raise ConfigurationError("n: required for method 'drag'")
        if int(cfg.n) != cfg.n or cfg.n < 1:
            raise ConfigurationError(f"n: must be an integer >= 1, got {cfg.n}")
    elif cfg.n is not None:
        raise ConfigurationError(f"n: only meaningful for method 'drag', not {cfg.method!r}")
    if not isinstance(cfg.seed, (int, np.integer)) or cfg.seed < 0:
        raise ConfigurationError(f"seed: must be a non-negative integer, got {cfg.seed!r}")
    if cfg.slow_delay_us < 0:
        raise ConfigurationError("slow_delay_us: must be >= 0")

    d_slow = len(problem.x0)
    d_fast = len(problem.y0)
    default_outer, default_inner = _DEFAULT_SDS[(cfg.problem, cfg.method)]
    outer_sds = _as_sds(
        cfg.outer_sd if cfg.outer_sd is not None else default_outer, d_slow, "outer_sd"
    )
    if cfg.method == "marginal":
        if cfg.inner_sd is not None:
            raise ConfigurationError("inner_sd: not used by the marginal method")
        inner_sds = None
    else:
        inner_sds = _as_sds(
            cfg.inner_sd if cfg.inner_sd is not None else default_inner, d_fast, "inner_sd"
        )

    iterations = cfg.iterations if cfg.iterations is not None else default_iterations(cfg.method, cfg.n)
    if int(iterations) != iterations or iterations < 1000:
        raise ConfigurationError(
            f"iterations: need at least 1000 for meaningful diagnostics, got {iterations}"
        )
    if not 0.0 <= cfg.burnin_fraction <= 0.9:
        raise ConfigurationError(
            f"burnin_fraction: must be in [0, 0.9], got {cfg.burnin_fraction}"
        )
    burnin = int(math.floor(cfg.burnin_fraction * iterations))
    if cfg.max_lag < 1:
        raise ConfigurationError(f"max_lag: must be >= 1, got {cfg.max_lag}")
    if iterations - burnin <= cfg.max_lag:
        raise ConfigurationError(
            f"max_lag: {cfg.max_lag} lags need more than {iterations - burnin} post-burn-in samples"
        )
    return _Resolved(
        cfg=cfg,
        problem=problem,
        outer_sds=outer_sds,
        inner_sds=inner_sds,
        iterations=int(iterations),
        burnin=burnin,
    )


@dataclass
class RunResult:
    """Raw output of one run, post-burn-in: iteration indices, chains,
    per-iteration accept flags (for the outer/x update), counters."""

    iters: np.ndarray
    xs: np.ndarray
    ys: np.ndarray | None
    accepted: np.ndarray
    stats: KernelStats
    eval_counts: EvalCounts
    wall_seconds: float


def run_chain(cfg: ExperimentConfig) -> RunResult:
    """Run the configured sampler and return the post-burn-in chain.

    Deterministic for a given config: one generator seeded from
    cfg.seed drives everything.  The artificial slow delay is never slept
    here; it enters the report as arithmetic (see run_experiment).
    """
    res = _resolve(cfg)
    problem = res.problem
    iters = res.iterations
    rng = np.random.default_rng(cfg.seed)
    stats = KernelStats()
    d_slow = len(problem.x0)

    xs = np.empty((iters, d_slow))
    accepted = np.zeros(iters, dtype=bool)

    t0 = time.perf_counter()
    if cfg.method == "marginal":
        ys = None
        counts = EvalCounts(0, 0)
        x = np.asarray(problem.x0, dtype=np.float64)
        e = float(problem.marginal_energy(x))
        proposal = GaussianWalkProposal(res.outer_sds)
        for t in range(iters):
            x, e, acc = marginal_step(x, e, problem.marginal_energy, proposal, rng, stats)
            xs[t] = x
            accepted[t] = acc
    else:
        model = problem.make_model()
        state = initial_state(model, problem.x0, problem.y0)
        ys = np.empty((iters, model.d_fast))
        if cfg.method == "joint":
            proposal = GaussianWalkProposal(np.concatenate([res.outer_sds, res.inner_sds]))
            for t in range(iters):
                state, acc = joint_step(state, proposal, model, rng, stats)
                xs[t] = state.x
                ys[t] = state.y
                accepted[t] = acc
        elif cfg.method == "single":
            x_prop = GaussianWalkProposal(res.outer_sds)
            y_prop = GaussianWalkProposal(res.inner_sds)
            for t in range(iters):
                state, x_acc, _ = single_var_step(state, x_prop, y_prop, model, rng, stats)
                xs[t] = state.x
                ys[t] = state.y
                accepted[t] = x_acc
        else:  # drag
            outer = GaussianWalkProposal(res.outer_sds)
            drag_cfg = DragConfig(n=cfg.n, inner_proposal=GaussianWalkProposal(res.inner_sds))
            for t in range(iters):
                state, acc = drag_step(state, outer, drag_cfg, model, rng, stats)
                xs[t] = state.x
                ys[t] = state.y
                accepted[t] = acc
        counts = model.eval_counts()
    wall = time.perf_counter() - t0

    b = res.burnin
    return RunResult(
        iters=np.arange(b, iters),
        xs=xs[b:],
        ys=None if ys is None else ys[b:],
        accepted=accepted[b:],
        stats=stats,
        eval_counts=counts,
        wall_seconds=wall,
    )


def _rate_names(method: str) -> dict:
    if method == "joint":
        return {"joint": "outer"}
    if method == "single":
        return {"x": "outer", "y": "inner"}
    if method == "marginal":
        return {"x": "outer"}
    return {"outer": "outer", "inner": "inner"}


def _config_echo(cfg: ExperimentConfig, res: _Resolved) -> dict:
    return {
        "problem": cfg.problem,
        "method": cfg.method,
        "n": cfg.n,
        "outer_sd": [float(v) for v in res.outer_sds],
        "inner_sd": None if res.inner_sds is None else [float(v) for v in res.inner_sds],
        "iterations": res.iterations,
        "burnin_fraction": cfg.burnin_fraction,
        "seed": int(cfg.seed),
        "max_lag": cfg.max_lag,
        "out_dir": cfg.out_dir,
        "slow_delay_us": cfg.slow_delay_us,
    }


@dataclass
class ExperimentReport:
    """Everything the run produced except the chain itself: the resolved
    config, the x-chain summary, the evaluation budget, the raw counter
    values, and timings.  ``simulated_cost_seconds`` is the wall time plus
    slow_preparations times the configured artificial delay, i.e. the
    projected cost had every slow preparation really cost that much."""

    config: dict
    summary: ChainSummary
    eval_counts: dict
    kernel_stats: dict
    wall_seconds: float
    simulated_cost_seconds: float
    chain: RunResult | None = field(default=None, compare=False, repr=False)

    def as_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "summary": self.summary.as_dict(),
            "eval_counts": dict(self.eval_counts),
            "kernel_stats": dict(self.kernel_stats),
            "wall_seconds": self.wall_seconds,
            "simulated_cost_seconds": self.simulated_cost_seconds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(
            config=dict(d["config"]),
            summary=ChainSummary.from_dict(d["summary"]),
            eval_counts={k: int(v) for k, v in d["eval_counts"].items()},
            kernel_stats={k: int(v) for k, v in d["kernel_stats"].items()},
            wall_seconds=float(d["wall_seconds"]),
            simulated_cost_seconds=float(d["simulated_cost_seconds"]),
        )


def run_experiment(cfg: ExperimentConfig, svg: bool = False, keep_chain: bool = False) -> ExperimentReport:
    """Run, summarise, and (when cfg.out_dir is set) write chain.csv,
    report.json and the ACF figure.

    The summary covers the first slow coordinate of the post-burn-in
    chain.  For the single-variable method the per-iteration accept flag
    in the CSV refers to the x update; both sub-updates are in
    kernel_stats.
    """
    res = _resolve(cfg)
    result = run_chain(cfg)
    rates = {
        name: rejection_rate(result.stats, pair)
        for name, pair in _rate_names(cfg.method).items()
    }
    summary = summarize_chain(result.xs[:, 0], rates, max_lag=cfg.max_lag)
    counts = {
        "slow_preparations": result.eval_counts.slow_preparations,
        "fast_evaluations": result.eval_counts.fast_evaluations,
    }
    stats = result.stats
    report = ExperimentReport(
        config=_config_echo(cfg, res),
        summary=summary,
        eval_counts=counts,
        kernel_stats={
            "outer_proposals": stats.outer_proposals,
            "outer_accepts": stats.outer_accepts,
            "inner_proposals": stats.inner_proposals,
            "inner_accepts": stats.inner_accepts,
        },
        wall_seconds=result.wall_seconds,
        simulated_cost_seconds=result.wall_seconds
        + counts["slow_preparations"] * cfg.slow_delay_us * 1e-6,
        chain=result if keep_chain else None,
    )
    if cfg.out_dir is not None:
        _write_outputs(cfg.out_dir, result, report, svg=svg)
    return report


def _write_outputs(out_dir: str, result: RunResult, report: ExperimentReport, svg: bool) -> None:
    from . import plots

    os.makedirs(out_dir, exist_ok=True)
    write_chain_csv(os.path.join(out_dir, "chain.csv"), result)
    with open(os.path.join(out_dir, "report.json"), "w", newline="") as f:
        json.dump(report.as_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    plots.save_acf_chain(report.summary.acf.values, out_dir, name="acf", svg=svg)


def write_chain_csv(path: str, result: RunResult) -> None:
    """Post-burn-in chain as RFC 4180 CSV: iter, x components, y
    components (when the method carries them), accept flag."""
    d_slow = result.xs.shape[1]
    d_fast = 0 if result.ys is None else result.ys.shape[1]
    header = (
        ["iter"]
        + [f"x{j}" for j in range(d_slow)]
        + [f"y{j}" for j in range(d_fast)]
        + ["accepted"]
    )
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for k in range(result.xs.shape[0]):
            row = [int(result.iters[k])]
            row += [repr(float(v)) for v in result.xs[k]]
            if result.ys is not None:
                row += [repr(float(v)) for v in result.ys[k]]
            row.append(1 if result.accepted[k] else 0)
            w.writerow(row)


def emit_figure1(
    out_dir: str,
    seed: int = 0,
    iterations: int = 100_000,
    burnin_fraction: float = 0.1,
    thin: int = 20,
    points: int = 1000,
    svg: bool = False,
):
    """Scatter of the exact-style sample: x from a thinned marginal chain,
    y filled in by a direct draw from the conditional.  Writes points.csv
    and the scatter figure; returns (x, y, written paths)."""
    cfg = ExperimentConfig(
        problem="test1",
        method="marginal",
        iterations=iterations,
        burnin_fraction=burnin_fraction,
        seed=seed,
    )
    result = run_chain(cfg)
    x = result.xs[::thin, 0]
    if x.size < points:
        raise ConfigurationError(
            f"iterations: {iterations} leaves only {x.size} thinned samples, need {points}"
        )
    x = x[:points]
    rng = np.random.default_rng([seed, 1])  # independent of the chain's stream
    y = np.array([test1_conditional_sample(v, rng) for v in x])

    from . import plots

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "points.csv")
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "y"])
        w.writerows([repr(float(a)), repr(float(b))] for a, b in zip(x, y))
    paths = [csv_path] + plots.save_scatter(x, y, out_dir, name="points", svg=svg)
    return x, y, paths


def parse_method_spec(spec: str):
    """Parse a method label: 'joint', 'single', 'marginal', or 'drag:N'."""
    if spec.startswith("drag:"):
        try:
            n = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"methods: bad drag ladder size in {spec!r}") from None
        return "drag", n
    if spec == "drag":
        raise ConfigurationError("methods: drag needs a ladder size, e.g. drag:100")
    if spec not in METHODS:
        raise ConfigurationError(f"methods: unknown method {spec!r}")
    return spec, None


DEFAULT_COMPARISON = ("marginal", "joint", "single", "drag:20", "drag:100", "drag:500")


def emit_acf_comparison(
    problem: str,
    methods=DEFAULT_COMPARISON,
    out_dir: str | None = None,
    iterations: int | None = None,
    seed: int = 0,
    max_lag: int = 30,
    svg: bool = False,
) -> dict:
    """Run each method at its defaults and tabulate the x-chain ACF side
    by side.  Writes acf.csv (method, lag, acf), summary.json with IAT and
    rejection rates per method, and the overlay figure.  Each method run
    matches a standalone run with the same seed.  Returns the summary."""
    curves = {}
    summary = {"problem": problem, "seed": seed, "max_lag": max_lag, "methods": {}}
    for spec in methods:
        method, n = parse_method_spec(spec)
        cfg = ExperimentConfig(
            problem=problem,
            method=method,
            n=n,
            iterations=iterations,
            seed=seed,
            max_lag=max_lag,
        )
        report = run_experiment(cfg)
        curves[spec] = report.summary.acf.values
        summary["methods"][spec] = {
            "iat": report.summary.iat,
            "rejection_rates": report.summary.rejection_rates,
            "iterations": report.config["iterations"],
        }
    if out_dir is not None:
        from . import plots

        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "acf.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["method", "lag", "acf"])
            for spec, values in curves.items():
                for lag, v in enumerate(values):
                    w.writerow([spec, lag, repr(float(v))])
        with open(os.path.join(out_dir, "summary.json"), "w", newline="") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write("\n")
        plots.save_acf_comparison(curves, out_dir, name="acf", svg=svg)
    summary["curves"] = curves
    return summary


def db_check(ns=(1, 2, 3), n_x: int = 3, n_y: int = 7) -> list:
    """Exact detailed-balance audit of the dragging kernel on the discrete
    model: for each ladder size, enumerate the transition matrix and
    report the worst violation of pi_u P(u,v) = pi_v P(v,u) and of row
    normalisation."""
    dm = make_discrete_model(n_x=n_x, n_y=n_y)
    pi = discrete_target(dm)
    records = []
    for n in ns:
        P = discrete_drag_transition_matrix(dm, n)
        flow = pi[:, None] * P
        asym = float(np.max(np.abs(flow - flow.T)))
        row_err = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
        records.append({"n": int(n), "max_asymmetry": asym, "row_sum_error": row_err})
    return records
