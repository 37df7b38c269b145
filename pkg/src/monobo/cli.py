"""Command-line entry point: ``monobo run|metrics|front|aerofoil-eval``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import MonoboError


def _cmd_run(args) -> int:
    from .runner import RunConfig, run_campaign

    config = RunConfig.load(args.config)
    if args.output_dir:
        config = RunConfig.from_dict({**config.to_dict(), "output_dir": args.output_dir})
    _, summary = run_campaign(config, figures=not args.no_figures)
    json.dump(summary, sys.stdout, indent=1, sort_keys=True)
    print()
    return 0


def _cmd_metrics(args) -> int:
    from .report import summarise
    from .runner import load_runs

    results = load_runs(args.runs)
    if not results:
        print(f"no runs found under {args.runs}", file=sys.stderr)
        return 1
    out = Path(args.out or args.runs)
    summary = summarise(results, out, args.grid, figures=not args.no_figures)
    json.dump(summary, sys.stdout, indent=1, sort_keys=True)
    print()
    return 0


def _cmd_front(args) -> int:
    from .problems import get_problem, true_front

    front = true_front(get_problem(args.problem, args.D), args.n)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([f"f{j}" for j in range(front.shape[1])])
    for row in front:
        writer.writerow([repr(float(v)) for v in row])
    if args.out:
        fh.close()
    return 0


def _read_decision(path) -> np.ndarray:
    text = Path(path).read_text().strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [float(v) for v in text.replace(",", " ").split()]
    if isinstance(data, dict):
        from .aerofoil import VARIABLES

        data = [data[name] for name in VARIABLES]
    return np.asarray(data, dtype=float)


def _cmd_aerofoil(args) -> int:
    from .aerofoil import ExternalEvaluator, aero_objective, build_shape, spar_cap, stiffness, write_coordinates

    shape = build_shape(_read_decision(args.decision))
    cap = spar_cap(shape)
    out = {
        "max_thickness": shape.max_thickness,
        "anchors": {k: [float(v) for v in p] for k, p in shape.anchors.items()},
        "spar_cap": {"centre_i": cap.centre_i, "width": cap.width},
        "stiffness": stiffness(shape),
    }
    if args.coords:
        write_coordinates(shape, args.coords)
        out["coordinates"] = str(args.coords)
    evaluator = ExternalEvaluator.from_env(args.evaluator)
    if evaluator is not None:
        out["aero_objective"] = aero_objective(shape, evaluator)
    json.dump(out, sys.stdout, indent=1, sort_keys=True)
    print()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monobo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a campaign from a YAML/JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("metrics", help="summarise saved runs: EAF CSVs, summary JSON, figures")
    p.add_argument("--runs", required=True)
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("front", help="write a true Pareto front sample as CSV")
    p.add_argument("--problem", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--D", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_front)

    p = sub.add_parser("aerofoil-eval", help="geometry and stiffness for one aerofoil design")
    p.add_argument("--decision", required=True, help="file with 13 numbers (JSON list/object or whitespace separated)")
    p.add_argument("--coords", help="write the contour coordinate file here")
    p.add_argument("--evaluator", help="aerodynamic command template with {input} and {output}")
    p.set_defaults(func=_cmd_aerofoil)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except MonoboError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
