"""Command-line entry point: ``adaptz run | gen | estimate | check``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from .checks import run_identity_checks
from .datagen import GenConfig, generate, resolve_truth, write_metadata_json
from .errors import AdaptzError, ConfigurationError, UsageError
from .estimators import sigma_plugin
from .harness import (
    ESTIMATORS,
    PRESETS,
    ExperimentConfig,
    apply_overrides,
    estimate_one,
    fit_fold1_pilot,
    load_config,
    preset,
    run_experiment,
    write_outputs,
)
from .inference import interval_from_se
from .model import LinkKind, read_dataset_csv, write_dataset_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to code 1."""

    def error(self, message: str):
        raise UsageError(f"{message}\n\n{self.format_usage()}")


def _set_pairs(items: Sequence[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _add_config_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="INI file with an [experiment] section")
    src.add_argument("--preset", help=f"named preset: {', '.join(PRESETS)}")
    p.add_argument("--seed", type=int, help="base seed (replication r uses seed + r)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override any config key; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adaptz", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run a coverage experiment")
    _add_config_args(run)
    run.add_argument("--reps", type=int, help="number of replications T")
    run.add_argument("--workers", type=int, help="worker processes (ADAPTZ_THREADS overrides)")
    run.add_argument("--estimators", help=f"comma list from: {', '.join(ESTIMATORS)}")
    run.add_argument("--out", help="output directory")
    run.add_argument("--svg", action="store_true", help="also write coverage.svg")
    run.add_argument("--quiet", action="store_true")

    gen = sub.add_parser("gen", help="generate one dataset as CSV")
    _add_config_args(gen)
    gen.add_argument("--out", required=True, help="CSV path; metadata goes to <out>.json")

    est = sub.add_parser("estimate", help="run estimators on a dataset CSV")
    est.add_argument("--data", required=True)
    est.add_argument("--estimator", action="append",
                     help=f"repeatable; one of {', '.join(ESTIMATORS)} (default adaptz-pl)")
    est.add_argument("--split", type=int, help="fold-1 size (default n // 4)")
    est.add_argument("--link", choices=("identity", "logistic"), default="identity")
    est.add_argument("--pilot", choices=("ols", "lasso", "mle", "glm-lasso"),
                     help="fold-1 pilot (default ols, or mle for logistic)")
    est.add_argument("--lambda", dest="lam", type=float, help="penalty for lasso pilots")
    est.add_argument("--u", help="comma-separated unit direction (default e1)")
    est.add_argument("--sigma", default="1.0", help="noise SD or 'plugin'")
    est.add_argument("--alpha", type=float, default=0.05)

    sub.add_parser("check", help="run the exact finite-sum identity checks")
    return parser


def _experiment_from_args(args) -> ExperimentConfig:
    overrides = _set_pairs(args.set)
    if args.config:
        cfg = load_config(args.config, overrides)
    else:
        cfg = preset(args.preset) if args.preset else ExperimentConfig()
        cfg = apply_overrides(cfg, overrides)
    extra = {}
    if args.seed is not None:
        extra["seed"] = str(args.seed)
    for key in ("reps", "workers", "estimators", "out"):
        val = getattr(args, key, None)
        if val is not None:
            extra[key] = str(val)
    if getattr(args, "svg", False):
        extra["svg"] = "true"
    return apply_overrides(cfg, extra)


def cmd_run(args) -> int:
    cfg = _experiment_from_args(args)
    out = cfg.output_dir or f"adaptz-{cfg.name}-seed{cfg.base_seed}"
    progress = None
    if not args.quiet:
        step = max(1, cfg.reps // 10)

        def progress(done: int) -> None:
            if done % step == 0 or done == cfg.reps:
                print(f"  {done}/{cfg.reps} replications", file=sys.stderr)

    report = run_experiment(cfg, progress)
    paths = write_outputs(report, out)
    for name, summary in report.summary().items():
        flag = " UNRELIABLE" if summary["unreliable"] else ""
        print(f"{name}: used {summary['replications_used']}/{cfg.reps}, "
              f"failures {summary['failures']}{flag}")
    print(f"wrote {len(paths)} files to {out}")
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = _experiment_from_args(args)
    seed = cfg.base_seed
    truth = resolve_truth(cfg.gen, seed)
    dataset, _ = generate(cfg.gen, seed, truth)
    write_dataset_csv(dataset, args.out)
    write_metadata_json(cfg.gen, seed, truth, dataset, str(args.out) + ".json")
    print(f"wrote {dataset.n} rows to {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    dataset = read_dataset_csv(args.data, args.split)
    link = LinkKind.logistic() if args.link == "logistic" else LinkKind.identity()
    names = args.estimator or ["adaptz-pl"]
    for name in names:
        if name not in ESTIMATORS:
            raise UsageError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")
    d0 = dataset.d0
    if args.u:
        u = np.array([float(v) for v in args.u.split(",")])
    else:
        u = np.eye(d0)[0]
    if u.shape != (d0,) or abs(np.linalg.norm(u) - 1.0) > 1e-10:
        raise UsageError("--u must be a unit vector of length d0")
    pilot_kind = args.pilot or ("mle" if args.link == "logistic" else "ols")
    gen_kw = {"d0": d0, "d1": dataset.d1, "n": dataset.n, "n1": dataset.n1, "link": link}
    if pilot_kind in ("ols", "lasso", "mle"):
        gen_kw["pilot_kind"] = pilot_kind
    gen_cfg = GenConfig(**gen_kw, lasso_penalty=args.lam if args.lam is not None else "universal")
    cfg = ExperimentConfig(gen_cfg, reps=1, estimators=tuple(names), u=tuple(u),
                           pilot=pilot_kind)
    pilot = fit_fold1_pilot(cfg, dataset)
    if args.sigma == "plugin":
        sigma = sigma_plugin(dataset)
    else:
        sigma = float(args.sigma)
    results = {}
    for name in names:
        out = estimate_one(name, dataset, pilot, u, link, sigma)
        iv = interval_from_se(out["estimate"], out["se"], 1.0 - args.alpha, "two-sided")
        results[name] = {
            "estimate": out["estimate"],
            "se": out["se"],
            "ci": [iv.lo, iv.hi],
            "theta": None if out["theta"] is None else out["theta"].tolist(),
            "iterations": out["iterations"],
            "converged": out["converged"],
        }
    doc = {"n": dataset.n, "n1": dataset.n1, "d0": d0, "d1": dataset.d1,
           "u": u.tolist(), "sigma": sigma, "pilot": pilot_kind, "results": results}
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_identity_checks()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        handler = {"run": cmd_run, "gen": cmd_gen, "estimate": cmd_estimate,
                   "check": cmd_check}[args.command]
        return handler(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"adaptz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AdaptzError, OSError, np.linalg.LinAlgError) as exc:
        print(f"adaptz: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        # malformed numeric flag values and the like
        print(f"adaptz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
