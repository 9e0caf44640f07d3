"""Solve for noise centres (and optionally amplitudes) that hit target post-selected averages.

All solving goes through the exact closed forms; the leading-order formulas
are too crude away from ``delta << Delta``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from scipy import optimize

from .analytic import gauss_overlap, numerators_exact, reduced_variance, shifted_mean
from .model import ModelParams, validate

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MAX_SWEEPS = 100


class Policy(enum.Enum):
    FIX_EPS_SOLVE_CENTERS = "fix-eps"
    SOLVE_BOTH = "solve-both"


class InfeasibleTarget(ValueError):
    def __init__(self, message: str, bound: float):
        super().__init__(message)
        self.bound = bound


class CalibrationError(RuntimeError):
    """The solver did not converge."""


def reference_eps(delta: float) -> tuple[float, float]:
    """Noise amplitudes ``(e/(3 delta), 2e/(3 delta))`` used for the reference configuration."""
    return math.e / (3.0 * delta), 2.0 * math.e / (3.0 * delta)


@dataclass(frozen=True)
class CalibrationTarget:
    """Targets for the post-selected averages plus the parameters held fixed.

    Under ``SOLVE_BOTH`` one target per arm cannot pin both the amplitude and
    the centre, so the noise contribution of each arm to P(b) must be given
    as well (``prob_b_noise_c``, ``prob_b_noise_t``).
    """

    target_mean_x_b: float
    target_mean_y_b: float
    base: ModelParams
    policy: Policy = Policy.FIX_EPS_SOLVE_CENTERS
    prob_b_noise_c: Optional[float] = None
    prob_b_noise_t: Optional[float] = None

    def check(self):
        validate(self.base)
        if not (math.isfinite(self.target_mean_x_b) and math.isfinite(self.target_mean_y_b)):
            raise ValueError("targets must be finite")
        if self.policy is Policy.FIX_EPS_SOLVE_CENTERS:
            if not (0.0 < self.base.eps_c <= 1.0 and 0.0 < self.base.eps_t <= 1.0):
                raise ValueError("fixed noise amplitudes must lie in (0, 1]")
        elif self.prob_b_noise_c is None or self.prob_b_noise_t is None \
                or self.prob_b_noise_c <= 0 or self.prob_b_noise_t <= 0:
            raise ValueError("solve-both needs positive prob_b_noise_c and prob_b_noise_t")


@dataclass(frozen=True)
class CalibrationResult:
    params: ModelParams
    residual_x: float
    residual_y: float
    iterations: int
    converged: bool
    note: str = ""


def _mean(params: ModelParams, arm: str) -> float:
    prob, num_x, num_y = numerators_exact(params)
    return (num_x if arm == "x" else num_y) / prob


def _center_name(arm: str) -> str:
    return "u" if arm == "x" else "v"


def _golden_max(f, lo: float, hi: float, xtol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    best = max((lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd), key=lambda t: t[1])
    return best


def _response(params: ModelParams, arm: str):
    name = _center_name(arm)
    return lambda center: _mean(params.replace(**{name: center}), arm)


def _extremum(params: ModelParams, arm: str, sign: float) -> tuple[float, float]:
    """(centre, value) of the largest (sign=+1) or smallest (sign=-1) response."""
    f = _response(params, arm)
    lo, hi = (0.0, 3.0 * params.Delta) if sign > 0 else (-3.0 * params.Delta, 0.0)
    arg, val = _golden_max(lambda c: sign * f(c), lo, hi, xtol=1e-9 * params.Delta)
    return arg, sign * val


def achievable_max(params: ModelParams, arm: str = "x") -> float:
    """Largest exact post-selected average of ``arm`` over centres in ``[0, 3 Delta]``.

    All other parameters, including the noise amplitude, are held fixed.
    """
    params = validate(params)
    if arm not in ("x", "y"):
        raise ValueError("arm must be 'x' or 'y'")
    return _extremum(params, arm, +1.0)[1]


def _solve_center(params: ModelParams, arm: str, target: float) -> tuple[float, int]:
    """Root of the response closest to zero; returns (centre, iterations)."""
    f = _response(params, arm)
    at_zero = f(0.0)
    if target == at_zero:
        return 0.0, 0
    sign = 1.0 if target > at_zero else -1.0
    peak, extreme = _extremum(params, arm, sign)
    if sign * (extreme - target) < 0:
        which = "maximum" if sign > 0 else "minimum"
        raise InfeasibleTarget(
            f"infeasible target {target:.17g} for <{arm}>_b: achievable {which} is {extreme:.17g}",
            extreme)
    lo, hi = sorted((0.0, peak))
    root, info = optimize.brentq(lambda c: f(c) - target, lo, hi, xtol=1e-15 * params.Delta,
                                 rtol=4 * 2.0 ** -52, maxiter=500, full_output=True)
    if not info.converged:
        raise CalibrationError(f"root search for {_center_name(arm)} failed: {info.flag}")
    return root, info.iterations


def _residuals(params: ModelParams, target: CalibrationTarget) -> tuple[float, float]:
    prob, num_x, num_y = numerators_exact(params)
    return target.target_mean_x_b - num_x / prob, target.target_mean_y_b - num_y / prob


def _fit_fixed_eps(target: CalibrationTarget, tol: float) -> CalibrationResult:
    params = target.base
    iterations = 0
    # the two arms couple only through P(b), so alternating 1-D solves converge fast
    for _ in range(MAX_SWEEPS):
        u, it_x = _solve_center(params, "x", target.target_mean_x_b)
        params = params.replace(u=u)
        v, it_y = _solve_center(params, "y", target.target_mean_y_b)
        params = params.replace(v=v)
        iterations += it_x + it_y
        rx, ry = _residuals(params, target)
        if abs(rx) <= tol and abs(ry) <= tol:
            return CalibrationResult(params, rx, ry, iterations, True)
    return CalibrationResult(params, rx, ry, iterations, False)


def _fit_solve_both(target: CalibrationTarget, tol: float) -> CalibrationResult:
    base = target.base
    D, d, p, q = base.Delta, base.delta, base.p, base.q
    ratio = reduced_variance(D, d) / D
    lam = d * d / (D * D + d * d)
    A, B = target.prob_b_noise_c, target.prob_b_noise_t
    prob = p + A + B

    # cat arm: <x>_b P(b) = p/2 + A u'(1), and u'(1) is affine in u
    u_shift = (target.target_mean_x_b * prob - 0.5 * p) / A
    u = (u_shift - lam) / (1.0 - lam)
    eps_c = A / (0.5 * q * ratio * gauss_overlap(u - 1.0, D, d))

    # tail arm: the G-weighted mean of v'(+1), v'(-1) is monotone in v
    goal = target.target_mean_y_b * prob / B

    def weighted(v):
        gl, gr = gauss_overlap(v - 1.0, D, d), gauss_overlap(v + 1.0, D, d)
        return (gl * shifted_mean(1.0, v, D, d) + gr * shifted_mean(-1.0, v, D, d)) / (gl + gr)

    lo = (goal - lam) / (1.0 - lam) - 1.0
    hi = (goal + lam) / (1.0 - lam) + 1.0
    v, info = optimize.brentq(lambda c: weighted(c) - goal, lo, hi, xtol=1e-15 * max(D, abs(lo), abs(hi)),
                              rtol=4 * 2.0 ** -52, maxiter=500, full_output=True)
    eps_t = B / (0.25 * q * ratio * (gauss_overlap(v - 1.0, D, d) + gauss_overlap(v + 1.0, D, d)))

    for name, eps in (("eps_c", eps_c), ("eps_t", eps_t)):
        if not eps <= 1.0:
            raise InfeasibleTarget(f"infeasible target: {name} would be {eps:.17g} > 1", eps)

    params = base.replace(u=u, v=v, eps_c=eps_c, eps_t=eps_t)
    rx, ry = _residuals(params, target)
    converged = info.converged and abs(rx) <= tol and abs(ry) <= tol
    return CalibrationResult(params, rx, ry, info.iterations, converged)


def fit(target: CalibrationTarget, tol: float = 1e-12) -> CalibrationResult:
    """Find parameters whose exact post-selected averages equal the targets.

    With fixed amplitudes, each centre is taken as the root of the response
    closest to zero; the response rises and then decays through a Gaussian
    envelope, so a second, larger root usually exists as well.

    Raises :class:`InfeasibleTarget` when a target lies beyond the achievable
    range and :class:`CalibrationError` when the solver fails to converge.
    """
    target.check()
    if target.target_mean_x_b == 0.5 and target.target_mean_y_b == 0.0:
        params = target.base.replace(eps_c=0.0, eps_t=0.0)
        return CalibrationResult(params, 0.0, 0.0, 0, True,
                                 note="baseline: unbiased post-selection already gives <x>_b=1/2, <y>_b=0")
    if target.policy is Policy.SOLVE_BOTH:
        result = _fit_solve_both(target, tol)
    else:
        result = _fit_fixed_eps(target, tol)
    if not result.converged:
        raise CalibrationError(
            f"calibration did not converge: residuals ({result.residual_x:.3e}, {result.residual_y:.3e})")
    return result
