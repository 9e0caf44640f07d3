"""Post-selection probability, post-selected averages and cross-moments.

Three independent routes are provided:

* ``paper-approx``: the leading-order averages, valid for small noise
  amplitudes and ``delta << Delta``;
* ``exact``: closed-form Gaussian integrals of the joint density;
* ``quadrature``: numerical integration of the joint density, used as the
  oracle for the other two.

Every term of the joint density ``Pi(x, y, b)`` is a product ``f(x) g(y)``
with one of the two factors a centred Gaussian, which is why all cross-moments
vanish.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from scipy import integrate

from .model import ModelParams, noise_prob_cat, noise_prob_tail, pointer_pdf, validate

# Half-width of each integration window, in standard deviations.
WINDOW_SIGMAS = 12.0


class Method(enum.Enum):
    PAPER_APPROX = "paper-approx"
    EXACT = "exact"
    QUADRATURE = "quadrature"


class QuadratureError(ArithmeticError):
    """The requested absolute tolerance was not reached."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class AnalyticReport:
    method: Method
    prob_b: float
    mean_x_b: float
    mean_y_b: float
    crossmoment_b: float
    signed_crossmoment: float
    crossmoment_not_b: Optional[float] = None
    quadrature_tol: Optional[float] = None
    # Estimated absolute error per quantity (quadrature only).
    abs_errors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["method"] = self.method.value
        return doc


def reduced_variance(Delta: float, delta: float) -> float:
    """Width ``Delta*delta/sqrt(Delta**2 + delta**2)`` of a prior times a likelihood.

    Despite the name this is a standard deviation, not a variance.
    """
    # hypot avoids overflow for widely separated widths
    return Delta * (delta / math.hypot(Delta, delta))


def gauss_overlap(z: float, Delta: float, delta: float) -> float:
    """Unnormalised overlap ``exp(-z**2 / (2 (Delta**2 + delta**2)))``."""
    s = Delta * Delta + delta * delta
    return math.exp(-z * z / (2.0 * s))


def shifted_mean(z: float, center: float, Delta: float, delta: float) -> float:
    """Mean of a prior centred at ``z`` multiplied by a likelihood centred at ``center``."""
    D2, d2 = Delta * Delta, delta * delta
    w = d2 / (D2 + d2)
    return w * z + (1.0 - w) * center


def joint_density(x, y, params: ModelParams):
    """Density of reading ``(x, y)`` and then finding the cat in the box."""
    D = params.Delta
    left = 0.5 * pointer_pdf(x - 1.0, D) * pointer_pdf(y, D)
    right = 0.25 * pointer_pdf(x, D) * (pointer_pdf(y - 1.0, D) + pointer_pdf(y + 1.0, D))
    hide_left = params.p + params.q * noise_prob_cat(x, params)
    hide_right = params.p + params.q * noise_prob_tail(y, params)
    return left * hide_left + right * hide_right


def marginal_density(x, y, params: ModelParams):
    """Density of reading ``(x, y)`` regardless of the post-selection outcome."""
    D = params.Delta
    return (0.5 * pointer_pdf(x - 1.0, D) * pointer_pdf(y, D)
            + 0.25 * pointer_pdf(x, D) * (pointer_pdf(y - 1.0, D) + pointer_pdf(y + 1.0, D)))


def _noise_weights(params: ModelParams) -> tuple[float, float, float]:
    """(Delta_R/Delta, cat-arm noise weight, tail-arm noise weight)."""
    ratio = reduced_variance(params.Delta, params.delta) / params.Delta
    wc = params.eps_c * gauss_overlap(params.u - 1.0, params.Delta, params.delta)
    wt = params.eps_t * (gauss_overlap(params.v - 1.0, params.Delta, params.delta)
                         + gauss_overlap(params.v + 1.0, params.Delta, params.delta))
    return ratio, wc, wt


def postselect_prob_approx(params: ModelParams) -> float:
    """P(b) = p + (q/4)(Delta_R/Delta){2 eps_c G(u-1) + eps_t[G(v-1) + G(v+1)]}."""
    params = validate(params)
    ratio, wc, wt = _noise_weights(params)
    return params.p + 0.25 * params.q * ratio * (2.0 * wc + wt)


def postselect_prob_exact(params: ModelParams) -> float:
    """Exact P(b); the Gaussian integrals reproduce the expression above term by term."""
    params = validate(params)
    D, d = params.Delta, params.delta
    ratio = reduced_variance(D, d) / D
    left = 0.5 * params.q * params.eps_c * ratio * gauss_overlap(params.u - 1.0, D, d)
    right = 0.25 * params.q * params.eps_t * ratio * (
        gauss_overlap(params.v - 1.0, D, d) + gauss_overlap(params.v + 1.0, D, d))
    return params.p + left + right


def _require_p(params: ModelParams):
    if params.p <= 0.0:
        raise ValueError("leading-order averages require p > 0")


def mean_x_postselected_approx(params: ModelParams) -> float:
    params = validate(params)
    _require_p(params)
    D, d = params.Delta, params.delta
    ratio = reduced_variance(D, d) / D
    coeff = params.q / (2.0 * params.p)
    return 0.5 + coeff * ratio * params.eps_c * shifted_mean(1.0, params.u, D, d) \
        * gauss_overlap(params.u - 1.0, D, d)


def mean_y_postselected_approx(params: ModelParams) -> float:
    params = validate(params)
    _require_p(params)
    D, d = params.Delta, params.delta
    ratio = reduced_variance(D, d) / D
    coeff = params.q / (4.0 * params.p)
    return coeff * ratio * params.eps_t * (
        shifted_mean(1.0, params.v, D, d) * gauss_overlap(params.v - 1.0, D, d)
        + shifted_mean(-1.0, params.v, D, d) * gauss_overlap(params.v + 1.0, D, d))


def numerators_exact(params: ModelParams) -> tuple[float, float, float]:
    """Closed-form ``(int Pi, int x Pi, int y Pi)`` over the plane for the b branch."""
    params = validate(params)
    D, d = params.Delta, params.delta
    ratio = reduced_variance(D, d) / D
    gl = gauss_overlap(params.v - 1.0, D, d)
    gr = gauss_overlap(params.v + 1.0, D, d)
    gc = gauss_overlap(params.u - 1.0, D, d)
    num_x = 0.5 * params.p + 0.5 * params.q * params.eps_c * ratio * gc * shifted_mean(1.0, params.u, D, d)
    num_y = 0.25 * params.q * params.eps_t * ratio * (
        gl * shifted_mean(1.0, params.v, D, d) + gr * shifted_mean(-1.0, params.v, D, d))
    return postselect_prob_exact(params), num_x, num_y


def mean_x_postselected_exact(params: ModelParams) -> float:
    prob, num_x, _ = numerators_exact(params)
    return num_x / prob


def mean_y_postselected_exact(params: ModelParams) -> float:
    prob, _, num_y = numerators_exact(params)
    return num_y / prob


def analytic_report_approx(params: ModelParams) -> AnalyticReport:
    """Leading-order report; the cross-moments are zero for this model."""
    return AnalyticReport(
        method=Method.PAPER_APPROX,
        prob_b=postselect_prob_approx(params),
        mean_x_b=mean_x_postselected_approx(params),
        mean_y_b=mean_y_postselected_approx(params),
        crossmoment_b=0.0,
        signed_crossmoment=0.0,
        crossmoment_not_b=0.0,
    )


def analytic_report_exact(params: ModelParams) -> AnalyticReport:
    prob, num_x, num_y = numerators_exact(params)
    return AnalyticReport(
        method=Method.EXACT,
        prob_b=prob,
        mean_x_b=num_x / prob,
        mean_y_b=num_y / prob,
        crossmoment_b=0.0,
        signed_crossmoment=0.0,
        crossmoment_not_b=0.0,
    )


class _Integrator:
    """One-dimensional integrals over fixed Gaussian windows, with error bookkeeping."""

    def __init__(self, epsabs: float):
        self.epsabs = epsabs

    def __call__(self, f, windows: list[tuple[float, float]]) -> tuple[float, float]:
        # windows: (centre, sigma) of every feature of f; the first sets the range
        lo = min(c - WINDOW_SIGMAS * s for c, s in windows)
        hi = max(c + WINDOW_SIGMAS * s for c, s in windows)
        points = sorted({min(max(x, lo), hi) for c, s in windows[1:]
                         for x in (c - WINDOW_SIGMAS * s, c, c + WINDOW_SIGMAS * s)}
                        - {lo, hi})
        val, err = integrate.quad(f, lo, hi, points=points or None, epsabs=self.epsabs,
                                  epsrel=0.0, limit=1000, full_output=1)[:2]
        return val, err


def _product(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    return a[0] * b[0], abs(a[0]) * b[1] + abs(b[0]) * a[1] + a[1] * b[1]


def _sum(*terms: tuple[float, float]) -> tuple[float, float]:
    return sum(t[0] for t in terms), sum(t[1] for t in terms)


def _ratio(num: tuple[float, float], den: tuple[float, float]) -> tuple[float, float]:
    value = num[0] / den[0]
    return value, (num[1] + abs(value) * den[1]) / (abs(den[0]) - den[1])


def analytic_report_quadrature(params: ModelParams, tol: float = 1e-8) -> AnalyticReport:
    """Integrate the joint density numerically to absolute accuracy ``tol``.

    Each term of the density factorises into an x-part and a y-part, so all
    plane integrals reduce to products of one-dimensional integrals. Raises
    :class:`QuadratureError` if any reported quantity carries an estimated
    error above ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    params = validate(params)
    D, d, p, q = params.Delta, params.delta, params.p, params.q
    DR = reduced_variance(D, d)
    quad = _Integrator(epsabs=1e-3 * tol)

    cat_peak = (shifted_mean(1.0, params.u, D, d), DR)
    tail_peaks = [(shifted_mean(1.0, params.v, D, d), DR),
                  (shifted_mean(-1.0, params.v, D, d), DR)]

    def prior(shift):
        return lambda t: pointer_pdf(t - shift, D)

    def tail_prior(t):
        return pointer_pdf(t - 1.0, D) + pointer_pdf(t + 1.0, D)

    def hide_cat(t):
        return p + q * noise_prob_cat(t, params)

    def hide_tail(t):
        return p + q * noise_prob_tail(t, params)

    # x-factors of the left-arm term (b branch and marginal) and of the right-arm term
    cat_b, cat_m, x_centred = [], [], []
    for k in (0, 1):
        cat_b.append(quad(lambda t, k=k: 0.5 * t ** k * pointer_pdf(t - 1.0, D) * hide_cat(t),
                          [(1.0, D), cat_peak]))
        cat_m.append(quad(lambda t, k=k: 0.5 * t ** k * pointer_pdf(t - 1.0, D), [(1.0, D)]))
        x_centred.append(quad(lambda t, k=k: 0.25 * t ** k * pointer_pdf(t, D), [(0.0, D)]))
    # y-factors
    y_centred, tail_b, tail_m = [], [], []
    for k in (0, 1):
        y_centred.append(quad(lambda t, k=k: t ** k * pointer_pdf(t, D), [(0.0, D)]))
        tail_b.append(quad(lambda t, k=k: t ** k * tail_prior(t) * hide_tail(t),
                           [(-1.0, D), (1.0, D)] + tail_peaks))
        tail_m.append(quad(lambda t, k=k: t ** k * tail_prior(t), [(-1.0, D), (1.0, D)]))

    def moment(x_left, x_right, y_left, y_right, i, j):
        return _sum(_product(x_left[i], y_left[j]), _product(x_right[i], y_right[j]))

    prob = moment(cat_b, x_centred, y_centred, tail_b, 0, 0)
    sx = moment(cat_b, x_centred, y_centred, tail_b, 1, 0)
    sy = moment(cat_b, x_centred, y_centred, tail_b, 0, 1)
    sxy = moment(cat_b, x_centred, y_centred, tail_b, 1, 1)
    total = moment(cat_m, x_centred, y_centred, tail_m, 0, 0)
    total_xy = moment(cat_m, x_centred, y_centred, tail_m, 1, 1)

    mean_x = _ratio(sx, prob)
    mean_y = _ratio(sy, prob)
    cross_b = _ratio(sxy, prob)
    errors = {"prob_b": prob[1], "mean_x_b": mean_x[1], "mean_y_b": mean_y[1],
              "crossmoment_b": cross_b[1]}

    not_b = (total[0] - prob[0], total[1] + prob[1])
    if not_b[0] - not_b[1] > 0.0:
        cross_not_b = _ratio((total_xy[0] - sxy[0], total_xy[1] + sxy[1]), not_b)
        signed = (cross_b[0] - cross_not_b[0], cross_b[1] + cross_not_b[1])
        errors["crossmoment_not_b"] = cross_not_b[1]
        errors["signed_crossmoment"] = signed[1]
        cross_not_b_value, signed_value = cross_not_b[0], signed[0]
    else:
        # post-selection always succeeds; the failed branch is empty
        cross_not_b_value, signed_value = None, cross_b[0]
        errors["signed_crossmoment"] = cross_b[1]

    worst = max(errors.values())
    if not worst <= tol:
        raise QuadratureError(f"quadrature did not reach tol={tol:g}", worst)

    return AnalyticReport(
        method=Method.QUADRATURE,
        prob_b=prob[0],
        mean_x_b=mean_x[0],
        mean_y_b=mean_y[0],
        crossmoment_b=cross_b[0],
        signed_crossmoment=signed_value,
        crossmoment_not_b=cross_not_b_value,
        quadrature_tol=tol,
        abs_errors=errors,
    )


def analytic_report(params: ModelParams, method="exact", tol: float = 1e-8) -> AnalyticReport:
    method = Method(method)
    if method is Method.PAPER_APPROX:
        return analytic_report_approx(params)
    if method is Method.EXACT:
        return analytic_report_exact(params)
    return analytic_report_quadrature(params, tol)
