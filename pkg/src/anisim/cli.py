"""Command-line interface.

Subcommands: ``run`` (one trainer over seeds), ``compare`` (paired variants),
``population`` (deterministic recursion and escape-time table), ``csq``
(nearly-orthogonal family report), ``validate`` (named check suites).
Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .covariance import Identity, Spiked
from .csq import build_family, csq_tolerance, epsilon_bound, sample_complexity_heuristic
from .experiments import (
    ExperimentConfig,
    PRESETS,
    compare_variants,
    preset_config,
    run_experiment,
)
from .population import escape_time_estimate, population_recursion
from .validation import run_suite, suite_names

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


def _set_by_path(doc: dict, dotted: str, raw: str) -> None:
    """Apply one --set override like trainer.eta0=1e-5 into a config dict."""
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        key = int(key) if isinstance(node, list) else key
        node = node[key]
    last = keys[-1]
    last = int(last) if isinstance(node, list) else last
    node[last] = value


def _load_config(args) -> ExperimentConfig:
    if args.preset:
        doc = json.loads(json.dumps(PRESETS[args.preset])) if args.preset in PRESETS else None
        if doc is None:
            raise ValueError(f"unknown preset {args.preset!r}; available: {sorted(PRESETS)}")
    elif args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
    else:
        raise ValueError("need --preset or --config")
    for override in args.set or []:
        if "=" not in override:
            raise ValueError(f"--set expects key=value, got {override!r}")
        key, _, raw = override.partition("=")
        _set_by_path(doc, key, raw)
    if args.seeds:
        doc["seeds"] = [int(s) for s in args.seeds.split(",")]
    return ExperimentConfig.from_dict(doc)


def _add_config_args(parser) -> None:
    parser.add_argument("--preset", help=f"builtin preset ({', '.join(sorted(PRESETS))})")
    parser.add_argument("--config", help="path to a JSON experiment config")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config field (dotted path, JSON value)")
    parser.add_argument("--seeds", help="comma-separated seed list override")
    parser.add_argument("--out", help="output directory for CSV and figures")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    summary = run_experiment(cfg, out_dir=args.out, make_plots=not args.no_plots)
    print(json.dumps(summary.to_dict(), indent=2))
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = _load_config(args)
    comparison = compare_variants(cfg, out_dir=args.out, make_plots=not args.no_plots)
    print(json.dumps(comparison.to_dict(), indent=2))
    return EXIT_OK


def _cmd_population(args) -> int:
    trajectory, hit = population_recursion(
        args.m0, args.eta_tilde, args.k_star, args.steps,
        target=args.target, record_every=args.record_every,
    )
    estimate = escape_time_estimate(args.m0, args.eta_tilde, args.k_star, args.target)
    if args.csv:
        with open(args.csv, "w", newline="\n") as fh:
            fh.write("t,m_t\n")
            for i, m in enumerate(trajectory):
                fh.write("%d,%.10g\n" % (i * args.record_every, m))
        print(f"wrote {args.csv}")
    print(f"k*={args.k_star} m0={args.m0} eta_tilde={args.eta_tilde} target={args.target}")
    print(f"recursion hit_time: {hit if hit is not None else 'not reached'}")
    print(f"ode escape estimate: {estimate:.6g}")
    if hit is not None:
        print(f"ratio estimate/hit: {estimate / hit:.3f}")
    return EXIT_OK


def _cmd_csq(args) -> int:
    if args.cov == "identity":
        spec = Identity(args.d)
    elif args.cov == "spiked":
        theta = np.zeros(args.d)
        theta[0] = 1.0
        spec = Spiked(args.d, args.kappa, theta)
    else:
        raise ValueError(f"unknown covariance {args.cov!r} (identity or spiked)")
    rows = []
    for s in range(args.runs):
        rep = build_family(spec, args.p, np.random.default_rng(args.seed + s))
        rows.append(rep)
    bound = epsilon_bound(spec, q_queries=args.p * args.p, k=args.k)
    print(f"{'run':>4} {'eps_hat':>10} {'eps_bound':>10} {'v':>10} "
          f"{'tau^2':>10} {'min|Qw|^2':>11} {'0.5 tr(Q)':>10}")
    half_trace = 0.5 * spec.trace()
    for i, rep in enumerate(rows):
        tau_sq = csq_tolerance(min(rep.epsilon_bound, 1.0), args.k) if rep.epsilon_bound else float("nan")
        print(f"{i:>4} {rep.max_pairwise_q_corr:>10.5f} "
              f"{rep.epsilon_bound if rep.epsilon_bound else float('nan'):>10.5f} "
              f"{rep.v:>10.5f} {tau_sq:>10.4g} {rep.min_q_norm_sq:>11.2f} {half_trace:>10.2f}")
    if bound.applicable:
        heur = sample_complexity_heuristic(spec, args.k, args.p * args.p)
        print(f"sample-complexity heuristic: n = tau^-2 = {heur.n_tau2:.4g}, "
              f"n = tau^-4 = {heur.n_tau4:.4g}, displayed form = {heur.n_displayed:.4g}")
    else:
        print("epsilon bound not applicable at these parameters "
              f"(regime checks: frob {bound.regime_frob_ok}, logd {bound.regime_logd_ok})")
    if args.csv:
        with open(args.csv, "w", newline="\n") as fh:
            fh.write("run,eps_hat,eps_bound,v,min_q_norm_sq\n")
            for i, rep in enumerate(rows):
                fh.write("%d,%.10g,%.10g,%.10g,%.10g\n" % (
                    i, rep.max_pairwise_q_corr, rep.epsilon_bound or float("nan"),
                    rep.v, rep.min_q_norm_sq,
                ))
        print(f"wrote {args.csv}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    results = run_suite(args.suite)
    for result in results:
        print(result.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anisim",
        description="Online SGD on single-index models with anisotropic Gaussian inputs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment over its seeds")
    _add_config_args(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run >= 2 variants on shared instance and seeds")
    _add_config_args(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    p_pop = sub.add_parser("population", help="deterministic recursion and escape table")
    p_pop.add_argument("--m0", type=float, required=True)
    p_pop.add_argument("--eta-tilde", type=float, required=True, dest="eta_tilde")
    p_pop.add_argument("--k-star", type=int, required=True, dest="k_star")
    p_pop.add_argument("--steps", type=int, default=10**6)
    p_pop.add_argument("--target", type=float, default=0.5)
    p_pop.add_argument("--record-every", type=int, default=1, dest="record_every")
    p_pop.add_argument("--csv", help="write (t, m_t) CSV here")
    p_pop.set_defaults(func=_cmd_population)

    p_csq = sub.add_parser("csq", help="sample nearly-Q-orthogonal families and report")
    p_csq.add_argument("--cov", default="identity", choices=("identity", "spiked"))
    p_csq.add_argument("--d", type=int, default=2000)
    p_csq.add_argument("--kappa", type=float, default=6.0)
    p_csq.add_argument("--p", type=int, default=1000)
    p_csq.add_argument("--k", type=int, default=2)
    p_csq.add_argument("--runs", type=int, default=5)
    p_csq.add_argument("--seed", type=int, default=0)
    p_csq.add_argument("--csv", help="write per-run CSV here")
    p_csq.set_defaults(func=_cmd_csq)

    p_val = sub.add_parser("validate", help="run a named check suite")
    p_val.add_argument("suite", help=f"one of {', '.join(suite_names())}, or 'all'")
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
