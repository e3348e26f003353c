"""Command line interface.

Subcommands: discretize | estimate | convergence | regularize | sigma-holo |
cauchy | harris | fit.  The environment variable CARDY_LAB_THREADS caps the
worker count.  Exit code 0 means all assertions passed, 2 means assertion
failures (reports still written), 1 means error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import (
    ExperimentConfig,
    cmd_cauchy,
    cmd_convergence,
    cmd_discretize,
    cmd_estimate,
    cmd_fit,
    cmd_harris,
    cmd_regularize,
    cmd_sigma_holo,
    load_defaults,
)
from .percolation import BLUE, YELLOW


def apply_thread_cap() -> None:
    cap = os.environ.get("CARDY_LAB_THREADS")
    if cap:
        import numba

        numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cardylab",
        description="critical-percolation laboratory: crossing probabilities, "
        "discrete holomorphicity and Harris systems",
    )
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domain", default=None, help="builtin generator name or domain spec JSON")
    common.add_argument("--params", default=None, help="generator parameters as JSON")
    common.add_argument("--n-ladder", default=None, help="comma separated scales, e.g. 8,16,32,64")
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--seed", type=int, default=None, help="RNG stream seed")
    common.add_argument("--theta", type=float, default=None)
    for name in ("a1", "a2", "a3", "a4", "a5", "a6"):
        common.add_argument(f"--{name}", type=float, default=None)
    common.add_argument("--B", type=int, default=None)
    common.add_argument("--r", type=int, default=None)
    common.add_argument("--delta", type=float, default=None)
    common.add_argument("--gamma", type=float, default=None)
    common.add_argument("--eta", type=float, default=None)
    common.add_argument("--samples-per-decision", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory root")
    common.add_argument("--config", default=None, help="JSON config file (defaults)")

    sub.add_parser("discretize", parents=[common])
    pe = sub.add_parser("estimate", parents=[common])
    pe.add_argument("--source", default="DA")
    pe.add_argument("--target", default="BC")
    pe.add_argument("--color", default="yellow", choices=["yellow", "blue"])
    sub.add_parser("convergence", parents=[common])
    sub.add_parser("regularize", parents=[common])
    sub.add_parser("sigma-holo", parents=[common])
    sub.add_parser("cauchy", parents=[common])
    sub.add_parser("harris", parents=[common])
    pf = sub.add_parser("fit", parents=[common])
    pf.add_argument("csv", help="CSV with columns n,value,stderr")
    return p


def config_from_args(args) -> ExperimentConfig:
    base = load_defaults(args.config) if args.config else load_defaults()
    cfg = dict(base)
    if args.domain:
        cfg["domain"] = args.domain
    if args.params:
        cfg["params"] = json.loads(args.params)
    if args.n_ladder:
        cfg["n_ladder"] = [int(x) for x in args.n_ladder.split(",")]
    if args.samples is not None:
        cfg["samples"] = args.samples
    if args.seed is not None:
        cfg["stream"] = args.seed
    for name in ("theta", "a1", "a2", "a3", "a4", "a5", "a6", "delta", "gamma", "eta"):
        v = getattr(args, name)
        if v is not None:
            cfg[name] = v
    if args.B is not None:
        cfg["B"] = args.B
    if args.r is not None:
        cfg["r"] = args.r
    if args.samples_per_decision is not None:
        cfg["samples_per_decision"] = args.samples_per_decision
    if args.out:
        cfg["outdir"] = args.out
    known = set(ExperimentConfig.__dataclass_fields__)
    return ExperimentConfig(**{k: v for k, v in cfg.items() if k in known})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    apply_thread_cap()
    cfg = config_from_args(args)
    try:
        if args.command == "discretize":
            report = cmd_discretize(cfg)
        elif args.command == "estimate":
            color = YELLOW if args.color == "yellow" else BLUE
            report = cmd_estimate(cfg, source=args.source, target=args.target, color=color)
        elif args.command == "convergence":
            report = cmd_convergence(cfg)
        elif args.command == "regularize":
            report = cmd_regularize(cfg)
        elif args.command == "sigma-holo":
            report = cmd_sigma_holo(cfg)
        elif args.command == "cauchy":
            report = cmd_cauchy(cfg)
        elif args.command == "harris":
            report = cmd_harris(cfg)
        elif args.command == "fit":
            report = cmd_fit(cfg, args.csv)
        else:  # pragma: no cover
            raise SystemExit(f"unknown command {args.command}")
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    checks = report.get("assertions", [])
    for c in checks:
        status = "PASS" if c.get("ok") else "FAIL"
        print(f"[{status}] {c.get('check')}")
    print(f"reports written to {report.get('outdir')}")
    return 0 if all(c.get("ok") for c in checks) else 2


if __name__ == "__main__":
    raise SystemExit(main())
