"""Command line harness.

Subcommands:
  run          one configured sampler run; writes chain.csv, report.json,
               and the chain ACF figure into --out
  fig1         joint scatter built from a thinned marginal chain plus
               direct conditional draws
  acf-compare  side-by-side ACF / IAT comparison of several methods
  db-check     exact detailed-balance audit of the dragging kernel on the
               enumerable discrete model

Exit codes: 0 on success, 2 for configuration problems (bad flags or
config file), 1 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigurationError
from . import harness

_DB_TOL = 1e-12


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", default=None, help="test1 or test2 (default test1)")
    p.add_argument("--iters", type=int, default=None, help="outer iterations")
    p.add_argument("--seed", type=int, default=None, help="rng seed (default 0)")
    p.add_argument("--max-lag", type=int, default=None, help="ACF table depth (default 30)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--svg", action="store_true", help="also write figures as SVG")


def _sd_list(text: str):
    try:
        values = [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise ConfigurationError(f"bad standard deviation list {text!r}") from None
    if not values:
        raise ConfigurationError(f"bad standard deviation list {text!r}")
    return values[0] if len(values) == 1 else values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dragmc",
        description="Metropolis samplers that drag fast variables along with big slow steps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one sampler and write chain + report")
    p_run.add_argument("--method", default=None, help="joint | single | marginal | drag")
    p_run.add_argument("--n", type=int, default=None, help="drag ladder size")
    p_run.add_argument("--outer-sd", type=_sd_list, default=None,
                       help="slow-block proposal sd (scalar or comma list)")
    p_run.add_argument("--inner-sd", type=_sd_list, default=None,
                       help="fast-block proposal sd (scalar or comma list)")
    p_run.add_argument("--burnin", type=float, default=None,
                       help="burn-in fraction to discard (default 0.1)")
    p_run.add_argument("--slow-delay-us", type=float, default=None,
                       help="artificial cost per slow preparation, microseconds")
    p_run.add_argument("--config", default=None,
                       help="JSON file with ExperimentConfig fields; flags override it")
    _add_common_run_flags(p_run)

    p_fig = sub.add_parser("fig1", help="scatter of marginal-chain x with conditional y")
    p_fig.add_argument("--thin", type=int, default=20, help="keep every k-th sample (default 20)")
    p_fig.add_argument("--points", type=int, default=1000, help="points to keep (default 1000)")
    _add_common_run_flags(p_fig)

    p_acf = sub.add_parser("acf-compare", help="ACF/IAT comparison across methods")
    p_acf.add_argument(
        "--methods",
        default=",".join(harness.DEFAULT_COMPARISON),
        help="comma list; drag takes its ladder size as drag:N",
    )
    _add_common_run_flags(p_acf)

    p_db = sub.add_parser("db-check", help="exact detailed-balance audit (discrete model)")
    p_db.add_argument("--n", default="1,2,3", help="comma list of ladder sizes (default 1,2,3)")
    p_db.add_argument("--out", default=None, help="optionally write results as JSON here")
    return parser


_CONFIG_KEYS = {
    "problem", "method", "n", "outer_sd", "inner_sd", "iterations",
    "burnin_fraction", "seed", "max_lag", "out_dir", "slow_delay_us",
}


def _run_config(args) -> harness.ExperimentConfig:
    fields: dict = {}
    if args.config is not None:
        with open(args.config) as f:
            loaded = json.load(f)
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - _CONFIG_KEYS)
        if unknown:
            raise ConfigurationError(f"config file has unknown keys: {', '.join(unknown)}")
        fields.update(loaded)
    overrides = {
        "problem": args.problem,
        "method": args.method,
        "n": args.n,
        "outer_sd": args.outer_sd,
        "inner_sd": args.inner_sd,
        "iterations": args.iters,
        "burnin_fraction": args.burnin,
        "seed": args.seed,
        "max_lag": args.max_lag,
        "out_dir": args.out,
        "slow_delay_us": args.slow_delay_us,
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return harness.ExperimentConfig(**fields)


def _cmd_run(args) -> int:
    cfg = _run_config(args)
    if cfg.out_dir is None:
        raise ConfigurationError("out_dir: required (pass --out or set it in the config file)")
    report = harness.run_experiment(cfg, svg=args.svg)
    s = report.summary
    print(f"{cfg.problem}/{cfg.method}" + (f" n={cfg.n}" if cfg.method == "drag" else ""))
    print(f"  post-burn-in samples: {s.length}")
    print(f"  mean(x) = {s.mean:.4f}  var(x) = {s.variance:.4f}  iat(x) = {s.iat:.2f}")
    for name, rate in s.rejection_rates.items():
        print(f"  rejection rate [{name}]: {rate:.3f}")
    print(f"  slow preparations: {report.eval_counts['slow_preparations']}"
          f"  fast evaluations: {report.eval_counts['fast_evaluations']}")
    print(f"  wall {report.wall_seconds:.2f}s  simulated cost {report.simulated_cost_seconds:.2f}s")
    print(f"  wrote chain.csv, report.json, acf figure to {cfg.out_dir}")
    return 0


def _cmd_fig1(args) -> int:
    if args.problem not in (None, "test1"):
        raise ConfigurationError("problem: fig1 draws its y from the test1 conditional")
    if args.out is None:
        raise ConfigurationError("out_dir: required (pass --out)")
    kwargs = {}
    if args.iters is not None:
        kwargs["iterations"] = args.iters
    if args.seed is not None:
        kwargs["seed"] = args.seed
    x, _, paths = harness.emit_figure1(
        args.out, thin=args.thin, points=args.points, svg=args.svg, **kwargs
    )
    print(f"wrote {len(x)} points: " + ", ".join(paths))
    return 0


def _cmd_acf_compare(args) -> int:
    if args.out is None:
        raise ConfigurationError("out_dir: required (pass --out)")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ConfigurationError("methods: empty list")
    summary = harness.emit_acf_comparison(
        problem=args.problem or "test1",
        methods=methods,
        out_dir=args.out,
        iterations=args.iters,
        seed=args.seed if args.seed is not None else 0,
        max_lag=args.max_lag if args.max_lag is not None else 30,
        svg=args.svg,
    )
    print(f"{summary['problem']}: integrated autocorrelation time of x")
    for spec in methods:
        m = summary["methods"][spec]
        rates = "  ".join(f"rej[{k}]={v:.2f}" for k, v in m["rejection_rates"].items())
        print(f"  {spec:>10}: iat = {m['iat']:7.1f}   {rates}")
    print(f"wrote acf.csv, summary.json, acf figure to {args.out}")
    return 0


def _cmd_db_check(args) -> int:
    try:
        ns = [int(v) for v in args.n.split(",") if v != ""]
    except ValueError:
        raise ConfigurationError(f"n: bad ladder size list {args.n!r}") from None
    if not ns:
        raise ConfigurationError("n: empty ladder size list")
    records = harness.db_check(ns=ns)
    worst = 0.0
    for rec in records:
        worst = max(worst, rec["max_asymmetry"], rec["row_sum_error"])
        ok = "OK" if rec["max_asymmetry"] < _DB_TOL and rec["row_sum_error"] < _DB_TOL else "FAIL"
        print(
            f"n={rec['n']}: max |pi_u P(u,v) - pi_v P(v,u)| = {rec['max_asymmetry']:.3e}"
            f"  row-sum error = {rec['row_sum_error']:.3e}  {ok}"
        )
    if args.out is not None:
        import os

        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "db_check.json")
        with open(path, "w", newline="") as f:
            json.dump({"tolerance": _DB_TOL, "results": records}, f, indent=2, sort_keys=True)
            f.write("\n")
        print(f"wrote {path}")
    if worst >= _DB_TOL:
        print("detailed balance violated beyond tolerance", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "fig1": _cmd_fig1,
        "acf-compare": _cmd_acf_compare,
        "db-check": _cmd_db_check,
    }
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"configuration error: bad JSON in config file: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
