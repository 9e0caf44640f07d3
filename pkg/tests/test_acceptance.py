"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the terminal
summary (see conftest.py) and by ``python -m tests.test_acceptance``.
"""
import time

import numpy as np
import pytest

from cheshire.analytic import (analytic_report_exact, analytic_report_quadrature,
                               mean_x_postselected_approx, mean_y_postselected_approx)
from cheshire.calibration import CalibrationTarget, fit, reference_eps
from cheshire.cli import cmd_reproduce_paper, cmd_simulate
from cheshire.io import to_json
from cheshire.model import DESK_PARAMS, PAPER_PARAMS, ModelParams
from cheshire.simulation import SimConfig, run

from .conftest import random_params

RESULTS: dict[int, str] = {}

QUAD_TOL = 1e-8
RANDOM_SETS = [random_params(np.random.default_rng(1000 + i)) for i in range(20)]


def record(number: int, title: str, checks: dict[str, bool], detail: str = ""):
    ok = all(checks.values())
    failed = [name for name, passed in checks.items() if not passed]
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
    if detail:
        line += f" [{detail}]"
    if failed:
        line += f" failed: {', '.join(failed)}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def within_se(estimate, expected, k=4.0):
    return abs(estimate.value - expected) <= k * estimate.std_error


def test_criterion_1_reference_values():
    start = time.perf_counter()
    doc = cmd_reproduce_paper(QUAD_TOL)
    elapsed = time.perf_counter() - start
    approx = doc["analytic"]["paper-approx"]
    record(1, "reference-value reproduction", {
        "P(b)=0.251+-0.002": abs(approx["prob_b"] - 0.251) <= 0.002,
        "<x>_b=1+-0.01": abs(approx["mean_x_b"] - 1.0) <= 0.01,
        "<y>_b=1+-0.01": abs(approx["mean_y_b"] - 1.0) <= 0.01,
        "runtime<1s": elapsed < 1.0,
    }, f"P(b)={approx['prob_b']:.5f} <x>_b={approx['mean_x_b']:.5f} "
       f"<y>_b={approx['mean_y_b']:.5f} t={elapsed:.3f}s")


def test_criterion_2_oracle_agreement():
    start = time.perf_counter()
    worst = 0.0
    for params in [PAPER_PARAMS] + RANDOM_SETS:
        exact = analytic_report_exact(params)
        quad = analytic_report_quadrature(params, tol=QUAD_TOL)
        for name in ("prob_b", "mean_x_b", "mean_y_b", "crossmoment_b"):
            worst = max(worst, abs(getattr(exact, name) - getattr(quad, name)))
    elapsed = time.perf_counter() - start
    record(2, "closed forms agree with quadrature", {
        "max|exact-quad|<=1e-8": worst <= 1e-8,
        "runtime<10s": elapsed < 10.0,
    }, f"21 sets, worst={worst:.2e}, t={elapsed:.2f}s")


def test_criterion_3_leading_order_quality():
    exact = analytic_report_exact(PAPER_PARAMS)
    rel_x = abs(mean_x_postselected_approx(PAPER_PARAMS) - exact.mean_x_b) / abs(exact.mean_x_b)
    rel_y = abs(mean_y_postselected_approx(PAPER_PARAMS) - exact.mean_y_b) / abs(exact.mean_y_b)
    record(3, "leading-order averages within 1% of exact", {
        "<x>_b": rel_x <= 0.01,
        "<y>_b": rel_y <= 0.01,
    }, f"rel_x={rel_x:.2e} rel_y={rel_y:.2e}")


def test_criterion_4_cross_moment_nullity():
    worst_b, worst_signed = 0.0, 0.0
    for params in [PAPER_PARAMS, DESK_PARAMS] + RANDOM_SETS:
        quad = analytic_report_quadrature(params, tol=QUAD_TOL)
        worst_b = max(worst_b, abs(quad.crossmoment_b))
        worst_signed = max(worst_signed, abs(quad.signed_crossmoment))
    record(4, "cross-moments vanish", {
        "|<xy>_b|<=1e-8": worst_b <= 1e-8,
        "|signed|<=1e-8": worst_signed <= 1e-8,
    }, f"22 sets, max|<xy>_b|={worst_b:.1e} max|signed|={worst_signed:.1e}")


def test_criterion_5_monte_carlo_vs_oracle():
    base = ModelParams(20.0, 2.0, *reference_eps(2.0), u=0.0, v=0.0, p=0.25)
    solved = fit(CalibrationTarget(1.0, 1.0, base)).params
    quad = analytic_report_quadrature(DESK_PARAMS, tol=QUAD_TOL)
    start = time.perf_counter()
    est = run(DESK_PARAMS, SimConfig(10 ** 8, seed=20240601, n_chunks=4))
    elapsed = time.perf_counter() - start
    pulls = {name: (getattr(est, name).value - getattr(quad, key)) / getattr(est, name).std_error
             for name, key in (("prob_b_hat", "prob_b"), ("mean_x_b", "mean_x_b"),
                               ("mean_y_b", "mean_y_b"), ("crossmoment_b", "crossmoment_b"))}
    record(5, "Monte Carlo agrees with quadrature at desk scale", {
        "desk fixture = solver output": (abs(solved.u - DESK_PARAMS.u) <= 1e-9
                                         and abs(solved.v - DESK_PARAMS.v) <= 1e-9),
        **{f"{name} within 4 SE": abs(z) <= 4.0 for name, z in pulls.items()},
        "runtime<60s": elapsed < 60.0,
    }, "pulls " + " ".join(f"{k}={v:+.2f}" for k, v in pulls.items())
       + f" se_x={est.mean_x_b.std_error:.4f} t={elapsed:.1f}s")


def test_criterion_6_trivial_regime():
    params = DESK_PARAMS.replace(eps_c=0.0, eps_t=0.0)
    exact = analytic_report_exact(params)
    est = run(params, SimConfig(10 ** 7, seed=6, n_chunks=4))
    record(6, "noise-free regime", {
        "P(b)=p": abs(exact.prob_b - params.p) <= 1e-12,
        "<x>_b=1/2": abs(exact.mean_x_b - 0.5) <= 1e-12,
        "<y>_b=0": abs(exact.mean_y_b) <= 1e-12,
        "MC P(b)": within_se(est.prob_b_hat, params.p),
        "MC <x>_b": within_se(est.mean_x_b, 0.5),
        "MC <y>_b": within_se(est.mean_y_b, 0.0),
        "MC <x>": within_se(est.mean_x_all, 0.5),
        "MC <y>": within_se(est.mean_y_all, 0.0),
    })


def test_criterion_7_calibration_round_trip():
    result = fit(CalibrationTarget(1.0, 1.0, PAPER_PARAMS), tol=1e-12)
    quad = analytic_report_quadrature(result.params, tol=QUAD_TOL)
    u, v = result.params.u, result.params.v
    record(7, "calibration round trip", {
        "u in [395,410]": 395.0 <= u <= 410.0,
        "v in [395,410]": 395.0 <= v <= 410.0,
        "residuals<=1e-10": abs(result.residual_x) <= 1e-10 and abs(result.residual_y) <= 1e-10,
        "quadrature <x>_b": abs(quad.mean_x_b - 1.0) <= 1e-8,
        "quadrature <y>_b": abs(quad.mean_y_b - 1.0) <= 1e-8,
    }, f"u={u:.4f} v={v:.4f}")


def test_criterion_8_determinism():
    reports = [to_json(cmd_simulate(DESK_PARAMS, 2 * 10 ** 6, seed=8, chunks=3)[0])
               for _ in range(2)]
    threaded = to_json(cmd_simulate(DESK_PARAMS, 2 * 10 ** 6, seed=8, chunks=3, jobs=3)[0])
    record(8, "bit-identical simulation reports", {
        "repeat": reports[0] == reports[1],
        "threads": reports[0] == threaded,
    })


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
