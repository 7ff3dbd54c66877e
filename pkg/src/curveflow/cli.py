"""Command-line entry points.

Subcommands: run a single experiment, run a batch, run the inequality
suites, list presets.  Exit code 0 means every hard assertion held, 1 means
a monitor or suite failed, 2 means the invocation itself was unusable
(bad config, unreadable input, unwritable output).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import experiments, inequalities
from .experiments import ConfigError, RunConfig


def _load_config(args) -> RunConfig:
    if args.preset and args.config:
        raise SystemExit("give either --preset or --config, not both")
    if args.preset:
        cfg = experiments.preset_config(args.preset)
    elif args.config:
        cfg = experiments.parse_config(Path(args.config).read_text(encoding="utf-8"))
    else:
        raise SystemExit("one of --preset or --config is required")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    result = experiments.run_experiment(cfg, args.out)
    summary = result.summary
    print(f"status: {summary['status']}")
    if summary["decay_fit"]:
        print(
            f"fitted decay rate: {summary['decay_fit']['rate']:.6g} "
            f"(r^2 = {summary['decay_fit']['r_squared']:.6f})"
        )
    print(f"final energy: {summary['final']['energy']:.6g}")
    print(f"artifacts in {args.out}")
    if not result.passed:
        print(f"FAILED monitors: {', '.join(summary['failed_monitors']) or summary['status']}")
        return 1
    return 0


def _cmd_batch(args) -> int:
    configs = experiments.parse_batch_config(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        configs = [dataclasses.replace(c, seed=args.seed) for c in configs]
    result = experiments.run_batch(configs, args.out, parallelism=args.parallelism)
    for run_dir, summary in zip(result.run_dirs, result.summaries):
        flag = "ok" if summary["passed"] else "FAILED"
        print(f"{flag:6s} {run_dir}  status={summary['status']}")
    print(f"aggregate report: {Path(args.out) / 'batch_summary.csv'}")
    return 0 if result.passed else 1


def _cmd_ineq(args) -> int:
    sampler = inequalities.ProfileSampler(seed=args.seed if args.seed is not None else 0)
    psw_i, psw_ii = inequalities.psw_suite(sampler, args.samples)
    sup_bound = inequalities.sup_curvature_suite(sampler, args.samples)
    coercivity = inequalities.speed_coercivity_study(sampler, max(args.samples, 100))
    interp = inequalities.interpolation_constant_study(sampler, (0, 1, 1), 2, args.samples)

    reports = [psw_i, psw_ii, sup_bound, coercivity, interp]
    doc = {"seed": sampler.seed, "samples": args.samples,
           "reports": [dataclasses.asdict(r) for r in reports]}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "inequality_report.json"
    experiments._atomic_write(path, json.dumps(doc, indent=2) + "\n")

    failures = 0
    for rep in reports:
        asserted = rep.inequality in (
            "mean_zero_l2_bound", "mean_zero_sup_bound", "curvature_sup_bound"
        )
        flag = ""
        if asserted:
            flag = "ok" if rep.violation_count == 0 else "VIOLATED"
            failures += rep.violation_count
        print(
            f"{rep.inequality:28s} samples={rep.sample_count:5d} "
            f"worst_ratio={rep.worst_ratio:.6f} violations={rep.violation_count} {flag}"
        )
    print(f"report: {path}")
    return 0 if failures == 0 else 1


def _cmd_presets(_args) -> int:
    for name in experiments.preset_names():
        cfg = experiments.preset_config(name)
        spec = cfg.initial
        modes = " ".join(f"m={m} a={a:g}" for m, a, _ in spec.modes) or "none"
        print(
            f"{name:20s} kind={spec.kind:16s} L0={spec.L0:.6g} omega={spec.omega} "
            f"N={spec.n_nodes} modes: {modes}  scheme={cfg.scheme} dt={cfg.dt:g} "
            f"t_max={cfg.t_max:g}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curveflow",
        description="Length-preserving sixth-order curvature flow laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("--config", help="path to a config JSON document")
    p_run.add_argument("--preset", help="name of a built-in preset")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_batch = sub.add_parser("batch", help="run a batch of experiments")
    p_batch.add_argument("--config", required=True, help="batch JSON: array of configs or {'runs': [...]}")
    p_batch.add_argument("--out", default="out", help="output directory")
    p_batch.add_argument("--parallelism", type=int, default=1)
    p_batch.add_argument("--seed", type=int, default=None)
    p_batch.set_defaults(func=_cmd_batch)

    p_ineq = sub.add_parser("ineq", help="run the inequality suites and studies")
    p_ineq.add_argument("--samples", type=int, default=1000)
    p_ineq.add_argument("--seed", type=int, default=None)
    p_ineq.add_argument("--out", default="out", help="output directory")
    p_ineq.set_defaults(func=_cmd_ineq)

    p_presets = sub.add_parser("presets", help="list built-in presets")
    p_presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        for issue in err.issues:
            print(f"config error: {issue}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
