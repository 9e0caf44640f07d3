"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence or
infeasible calibration target.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__, analytic, calibration, simulation
from .io import estimates_csv, load_params, to_json, write_output
from .model import PAPER_PARAMS, ModelParams, ParameterError, validate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

METHODS = ("paper-approx", "exact", "quadrature")


def _document(command: str, params: ModelParams, **sections) -> dict:
    doc = {"tool": "cheshire", "version": __version__, "command": command,
           "params": params.to_dict()}
    doc.update(sections)
    return doc


def cmd_analytic(params: ModelParams, method: str = "all", tol: float = 1e-8) -> dict:
    params = validate(params)
    methods = list(METHODS) if method == "all" else [method]
    reports = {m: analytic.analytic_report(params, m, tol).to_dict() for m in methods}
    return _document("analytic", params, methods=methods, tol=tol, analytic=reports)


def cmd_simulate(params: ModelParams, n_events: int, seed: int = 0, chunks: int = 1,
                 jobs: int = 1) -> tuple[dict, simulation.EstimateSet]:
    params = validate(params)
    config = simulation.SimConfig(n_events, seed, chunks).check()
    warnings = []
    message = simulation.resolution_warning(params, n_events)
    if message:
        warnings.append(message)
    est = simulation.run(params, config, n_jobs=jobs)
    doc = _document("simulate", params, seed=seed, n_events=n_events, n_chunks=chunks,
                    simulation=est.to_dict(), warnings=warnings)
    return doc, est


def cmd_fit(params: ModelParams, target_x: float, target_y: float, tol: float = 1e-12,
            policy: str = "fix-eps", prob_b_noise_c: Optional[float] = None,
            prob_b_noise_t: Optional[float] = None) -> dict:
    params = validate(params)
    target = calibration.CalibrationTarget(target_x, target_y, params,
                                           calibration.Policy(policy), prob_b_noise_c,
                                           prob_b_noise_t)
    result = calibration.fit(target, tol)
    check = analytic.analytic_report_exact(result.params)
    return _document(
        "fit", params,
        calibration={
            "policy": target.policy.value,
            "target_mean_x_b": target_x,
            "target_mean_y_b": target_y,
            "tol": tol,
            "params": result.params.to_dict(),
            "residual_x": result.residual_x,
            "residual_y": result.residual_y,
            "iterations": result.iterations,
            "converged": result.converged,
            "note": result.note,
        },
        analytic={"exact": check.to_dict()},
    )


REFERENCE_CLAIMS = {"prob_b": 0.251, "mean_x_b": 1.0, "mean_y_b": 1.0, "crossmoment_b": 0.0,
                "signed_crossmoment": 0.0}


def cmd_reproduce_paper(tol: float = 1e-8) -> dict:
    doc = cmd_analytic(PAPER_PARAMS, "all", tol)
    doc["command"] = "reproduce-paper"
    doc["claims"] = REFERENCE_CLAIMS
    return doc


def comparison_table(doc: dict) -> str:
    methods = doc["methods"]
    header = ["quantity", "claimed"] + methods
    rows = [header]
    for key, claim in REFERENCE_CLAIMS.items():
        rows.append([key, format(claim, "g")]
                    + [format(doc["analytic"][m][key], ".6g") for m in methods])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cheshire",
                                     description="Classical post-selected cat model toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, params=True):
        if params:
            p.add_argument("--params", required=True, metavar="FILE",
                           help="JSON parameter file, or a built-in set: paper, desk")
        p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")

    p = sub.add_parser("analytic", help="P(b), post-selected averages and cross-moments")
    common(p)
    p.add_argument("--method", default="all", choices=METHODS + ("all",))
    p.add_argument("--tol", type=float, default=1e-8, help="quadrature absolute tolerance")

    p = sub.add_parser("simulate", help="Monte Carlo estimates")
    common(p)
    p.add_argument("--events", type=int, required=True, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--chunks", type=int, default=1, metavar="C")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (result is unaffected)")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("fit", help="solve noise centres for target post-selected averages")
    common(p)
    p.add_argument("--target-x", type=float, default=1.0)
    p.add_argument("--target-y", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--policy", choices=[m.value for m in calibration.Policy], default="fix-eps")
    p.add_argument("--prob-b-noise-c", type=float)
    p.add_argument("--prob-b-noise-t", type=float)

    p = sub.add_parser("reproduce-paper", help="analytic comparison for the reference parameter set")
    common(p, params=False)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--format", choices=("table", "json"), default="table")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "reproduce-paper":
            doc = cmd_reproduce_paper(args.tol)
            text = to_json(doc) if args.format == "json" else comparison_table(doc)
            write_output(text, args.out, sys.stdout)
            return EXIT_OK
        params = load_params(args.params)
        if args.command == "analytic":
            doc = cmd_analytic(params, args.method, args.tol)
            write_output(to_json(doc), args.out, sys.stdout)
        elif args.command == "simulate":
            doc, est = cmd_simulate(params, args.events, args.seed, args.chunks, args.jobs)
            for message in doc["warnings"]:
                print(f"warning: {message}", file=sys.stderr)
            text = estimates_csv(est.rows()) if args.format == "csv" else to_json(doc)
            write_output(text, args.out, sys.stdout)
        elif args.command == "fit":
            doc = cmd_fit(params, args.target_x, args.target_y, args.tol, args.policy,
                          args.prob_b_noise_c, args.prob_b_noise_t)
            write_output(to_json(doc), args.out, sys.stdout)
    except (calibration.InfeasibleTarget, calibration.CalibrationError,
            analytic.QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
