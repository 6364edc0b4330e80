"""Command-line front end.

Five subcommands: ``tec`` (three-outcome efficacy-threshold test on a 2x2
CSV), ``iv`` (instrument-validity test on a z,x,y CSV), ``simulate-pcd``
(the Monte-Carlo detection study, writing a curve CSV), ``advise``
(plan recommendations from declared topology labels) and ``berkeley`` (the
bundled admissions case study).  Every run prints a single JSON report to
standard output and exits 0; anything invalid (bad flags, malformed files,
out-of-range parameters) exits 2 with a message on standard error.  A test's
outcome is data inside the report, never an exit code.

Reports are versioned with a "schema" field and embed input digests and the
seed actually used, so any run can be reproduced exactly.  Randomized
subcommands derive a fresh seed when ``--seed`` is not given and announce it
on standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from ._version import __version__
from .advisor import AdvisorInput, advise
from .core import Region
from .dataio import as_binary_table, berkeley_analysis, file_digest, load_table
from .errors import TritestError, ValidationError
from .procedures import iv_ternary, tec_ternary
from .sim import SimConfig, run_pcd_study

__all__ = ["cli_dispatch", "main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tritest",
        description="Three-outcome hypothesis tests for partially identifiable causal queries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tec", help="efficacy-threshold test on a 2x2 x,y,count CSV")
    p.add_argument("--data", required=True, help="CSV file with header x,y,count and 0/1 labels")
    p.add_argument("--c", required=True, type=float, help="efficacy threshold in [0, 1]")
    p.add_argument("--alpha1", type=float, default=0.025, help="stage-1 level (default 0.025)")
    p.add_argument("--alpha2", type=float, default=0.025, help="stage-2 level (default 0.025)")

    p = sub.add_parser("iv", help="instrument-validity test on a z,x,y,count CSV")
    p.add_argument("--data", required=True, help="CSV file with header z,x,y,count")
    p.add_argument("--alpha", type=float, default=0.05, help="bootstrap test level (default 0.05)")
    p.add_argument("--bootstrap", type=int, default=2000, help="bootstrap replicates (default 2000)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed; derived and announced if omitted")

    p = sub.add_parser("simulate-pcd", help="run the detection-probability study")
    p.add_argument("--config", required=True, help="JSON study configuration")
    p.add_argument("--out", required=True, help="output CSV path for the curve")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (results are identical)")

    p = sub.add_parser("advise", help="recommend two-stage plans from topology labels")
    for flag in ("--r0", "--r1", "--r2"):
        p.add_argument(
            flag, required=True, help="label: one of cno, onc, clopen, neither"
        )
    p.add_argument(
        "--control-set",
        default="",
        help="comma-separated regions whose error columns must be controlled, e.g. r0,r2",
    )

    p = sub.add_parser("berkeley", help="instrument-validity case study on the bundled data")
    p.add_argument("--alpha", type=float, default=0.05, help="bootstrap test level (default 0.05)")
    p.add_argument("--bootstrap", type=int, default=2000, help="bootstrap replicates (default 2000)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed; derived and announced if omitted")

    return parser


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return int(seed)
    derived = int(np.random.SeedSequence().entropy)
    print(f"no --seed given; derived seed {derived}", file=sys.stderr)
    return derived


def _parse_control_set(text: str) -> frozenset:
    regions = set()
    for token in text.split(","):
        token = token.strip().lower()
        if not token:
            continue
        if token in ("r0", "r1", "r2"):
            regions.add(Region(int(token[1])))
        elif token in ("0", "1", "2"):
            regions.add(Region(int(token)))
        else:
            raise ValidationError(
                f"unknown region {token!r} in control set; expected r0, r1 or r2"
            )
    return frozenset(regions)


def _report_skeleton(command: str, args: dict, seed: Optional[int]) -> dict:
    return {
        "schema": 1,
        "version": __version__,
        "command": command,
        "args": args,
        "seed": seed,
    }


def _cmd_tec(args: argparse.Namespace) -> dict:
    raw = load_table(args.data, with_instrument=False)
    table = as_binary_table(raw)
    result = tec_ternary(table, args.c, args.alpha1, args.alpha2)
    report = _report_skeleton(
        "tec",
        {"data": args.data, "c": args.c, "alpha1": args.alpha1, "alpha2": args.alpha2},
        seed=None,
    )
    report["input"] = {
        "path": args.data,
        "sha256": file_digest(args.data),
        "n": table.n,
        "x_labels": list(raw.labels[0]),
        "y_labels": list(raw.labels[1]),
    }
    report["result"] = result.to_json_dict()
    return report


def _cmd_iv(args: argparse.Namespace) -> dict:
    table = load_table(args.data, with_instrument=True)
    seed = _resolve_seed(args.seed)
    result = iv_ternary(table, alpha=args.alpha, bootstrap=args.bootstrap, seed=seed)
    report = _report_skeleton(
        "iv", {"data": args.data, "alpha": args.alpha, "bootstrap": args.bootstrap}, seed=seed
    )
    report["input"] = {
        "path": args.data,
        "sha256": file_digest(args.data),
        "n": table.n,
        "card": {"z": table.z_card, "x": table.x_card, "y": table.y_card},
        "z_labels": list(table.labels[0]),
        "x_labels": list(table.labels[1]),
        "y_labels": list(table.labels[2]),
    }
    report["result"] = result.to_json_dict()
    return report


def _cmd_simulate(args: argparse.Namespace) -> dict:
    cfg = SimConfig.from_json_file(args.config)
    if args.jobs < 1:
        raise ValidationError(f"--jobs must be >= 1, got {args.jobs}")
    curve = run_pcd_study(cfg, n_jobs=args.jobs)
    curve.to_csv_file(args.out)
    report = _report_skeleton(
        "simulate-pcd", {"config": args.config, "out": args.out, "jobs": args.jobs}, seed=cfg.seed
    )
    report["input"] = {"path": args.config, "sha256": file_digest(args.config)}
    report["result"] = {
        "out": args.out,
        "rows": len(curve.points),
        "config": cfg.to_json_dict(),
    }
    return report


def _cmd_advise(args: argparse.Namespace) -> dict:
    control = _parse_control_set(args.control_set)
    inp = AdvisorInput(labels=(args.r0, args.r1, args.r2), control_set=control)
    recommendations = advise(inp)
    report = _report_skeleton(
        "advise",
        {
            "r0": args.r0,
            "r1": args.r1,
            "r2": args.r2,
            "control_set": sorted(int(r) for r in control),
        },
        seed=None,
    )
    report["input"] = None
    report["result"] = [r.to_json_dict() for r in recommendations]
    return report


def _cmd_berkeley(args: argparse.Namespace) -> dict:
    seed = _resolve_seed(args.seed)
    return berkeley_analysis(args.alpha, args.bootstrap, seed)


_COMMANDS = {
    "tec": _cmd_tec,
    "iv": _cmd_iv,
    "simulate-pcd": _cmd_simulate,
    "advise": _cmd_advise,
    "berkeley": _cmd_berkeley,
}


def cli_dispatch(argv: Optional[list] = None) -> int:
    """Parse arguments, run one subcommand, print its JSON report.

    Returns the process exit code instead of exiting, so it can be driven
    in-process; :func:`main` is the console-script wrapper around it.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = _COMMANDS[args.command](args)
    except TritestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))
