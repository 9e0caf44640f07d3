import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cheshire.analytic import (Method, QuadratureError, analytic_report,
                               analytic_report_exact, analytic_report_quadrature,
                               gauss_overlap, joint_density, marginal_density,
                               mean_x_postselected_approx, mean_x_postselected_exact,
                               mean_y_postselected_approx, mean_y_postselected_exact,
                               postselect_prob_approx, postselect_prob_exact,
                               reduced_variance, shifted_mean)
from cheshire.model import PAPER_PARAMS, ModelParams, pointer_pdf

from .conftest import random_params

DESK_EIGHT = ModelParams(20.0, 2.0, math.e / 6, math.e / 3, 8.0, 8.0, 0.25)

# 2-D plane integrals of the density at DESK_EIGHT, from tests/oracles/desk_plane_integrals.py
DESK_EIGHT_PROB_B = 0.29711291668283298401
DESK_EIGHT_MEAN_X_B = 0.84539981814066781481
DESK_EIGHT_MEAN_Y_B = 0.83185900562594841936

widths = st.floats(0.05, 5e3)


def test_reduced_variance_values():
    assert reduced_variance(7.0, 7.0) == pytest.approx(7.0 / math.sqrt(2.0), rel=1e-15)
    assert reduced_variance(3.0, 3e9) == pytest.approx(3.0, rel=1e-9)
    assert reduced_variance(1000.0, 10.0) == pytest.approx(9.99950003749687527341, rel=1e-15)


@given(Delta=widths, delta=widths)
def test_reduced_variance_below_both_widths(Delta, delta):
    assert reduced_variance(Delta, delta) < min(Delta, delta)


def test_gauss_overlap_values():
    assert gauss_overlap(0.0, 3.0, 4.0) == 1.0
    assert gauss_overlap(401.0, 1000.0, 10.0) == pytest.approx(0.922754130531775700377, rel=1e-15)
    assert gauss_overlap(17.3, 20.0, 2.0) == gauss_overlap(-17.3, 20.0, 2.0)


@given(z=st.floats(-1e4, 1e4), Delta=widths, delta=widths)
def test_gauss_overlap_range_and_evenness(z, Delta, delta):
    g = gauss_overlap(z, Delta, delta)
    assert 0.0 <= g <= 1.0
    assert g == gauss_overlap(-z, Delta, delta)


def test_shifted_mean_values():
    assert shifted_mean(3.5, 3.5, 10.0, 2.0) == 3.5
    assert shifted_mean(1.0, 402.0, 1000.0, 10.0) == pytest.approx(401.959904009599040096, rel=1e-15)
    assert shifted_mean(1.0, 402.0, 1000.0, 1e-9) == pytest.approx(402.0, rel=1e-15)


@given(z=st.floats(-1e3, 1e3), center=st.floats(-1e3, 1e3), Delta=widths, delta=widths)
def test_shifted_mean_between(z, center, Delta, delta):
    m = shifted_mean(z, center, Delta, delta)
    lo, hi = min(z, center), max(z, center)
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    assert lo - slack <= m <= hi + slack


def test_joint_density_noise_free_reduction():
    params = PAPER_PARAMS.replace(eps_c=0.0, eps_t=0.0)
    x, y = np.meshgrid(np.linspace(-3000, 3000, 31), np.linspace(-3000, 3000, 29))
    D, p = params.Delta, params.p
    expected = p * (0.5 * pointer_pdf(x - 1, D) * pointer_pdf(y, D)
                    + 0.25 * pointer_pdf(x, D) * (pointer_pdf(y - 1, D) + pointer_pdf(y + 1, D)))
    np.testing.assert_allclose(joint_density(x, y, params), expected, rtol=1e-14)
    np.testing.assert_allclose(joint_density(x, y, params), p * marginal_density(x, y, params),
                               rtol=1e-14)


@given(x=st.floats(-1e4, 1e4), y=st.floats(-1e4, 1e4))
def test_joint_density_nonnegative_and_below_marginal(x, y):
    value = joint_density(x, y, PAPER_PARAMS)
    assert 0.0 <= value <= marginal_density(x, y, PAPER_PARAMS) * (1 + 1e-12)


def test_joint_density_integrates_to_exact_prob():
    # direct 2-D integration, no factorisation
    params = DESK_EIGHT
    total, err = integrate.dblquad(lambda y, x: joint_density(x, y, params),
                                   -260, 260, -260, 260, epsabs=1e-11, epsrel=0)
    assert abs(total - postselect_prob_exact(params)) <= 1e-8


def test_prob_b_matches_plane_oracle():
    assert postselect_prob_exact(DESK_EIGHT) == pytest.approx(DESK_EIGHT_PROB_B, abs=1e-12)
    assert postselect_prob_approx(DESK_EIGHT) == pytest.approx(DESK_EIGHT_PROB_B, abs=1e-12)


@pytest.mark.parametrize("report", [analytic_report_exact, analytic_report_quadrature])
def test_desk_eight_matches_plane_oracle(report):
    result = report(DESK_EIGHT)
    assert result.prob_b == pytest.approx(DESK_EIGHT_PROB_B, abs=1e-12)
    assert result.mean_x_b == pytest.approx(DESK_EIGHT_MEAN_X_B, abs=1e-12)
    assert result.mean_y_b == pytest.approx(DESK_EIGHT_MEAN_Y_B, abs=1e-12)
    assert abs(result.crossmoment_b) <= 1e-12


def test_reference_prob_b():
    assert postselect_prob_approx(PAPER_PARAMS) == pytest.approx(0.251, abs=0.002)
    assert round(postselect_prob_approx(PAPER_PARAMS), 4) == 0.2509


def test_noise_free_prob_is_p():
    params = PAPER_PARAMS.replace(eps_c=0.0, eps_t=0.0)
    assert postselect_prob_approx(params) == params.p
    assert postselect_prob_exact(params) == params.p


def test_leading_order_averages_reference_set():
    assert mean_x_postselected_approx(PAPER_PARAMS) == pytest.approx(1.0, abs=0.01)
    assert mean_y_postselected_approx(PAPER_PARAMS) == pytest.approx(1.0, abs=0.01)


def test_leading_order_vanishing_corrections():
    assert mean_x_postselected_approx(PAPER_PARAMS.replace(eps_c=0.0)) == 0.5
    assert mean_y_postselected_approx(PAPER_PARAMS.replace(eps_t=0.0)) == 0.0


def test_leading_order_coefficients_at_quarter():
    # at p = 1/4 the generic q/(2p), q/(4p) must equal the literal 3/2, 3/4
    P = PAPER_PARAMS
    D, d = P.Delta, P.delta
    ratio = reduced_variance(D, d) / D
    literal_x = 0.5 + 1.5 * ratio * P.eps_c * shifted_mean(1, P.u, D, d) * gauss_overlap(P.u - 1, D, d)
    literal_y = 0.75 * ratio * P.eps_t * (shifted_mean(1, P.v, D, d) * gauss_overlap(P.v - 1, D, d)
                                          + shifted_mean(-1, P.v, D, d) * gauss_overlap(P.v + 1, D, d))
    assert mean_x_postselected_approx(P) == pytest.approx(literal_x, rel=1e-15)
    assert mean_y_postselected_approx(P) == pytest.approx(literal_y, rel=1e-15)


def test_leading_order_needs_p():
    with pytest.raises(ValueError):
        mean_x_postselected_approx(PAPER_PARAMS.replace(p=0.0))


def test_exact_reference_values():
    # frozen after agreement with quadrature (see test_exact_matches_quadrature)
    report = analytic_report_exact(PAPER_PARAMS)
    assert report.prob_b == pytest.approx(0.2509408185355211, abs=1e-15)
    assert report.mean_x_b == pytest.approx(1.0003294582624576, abs=1e-13)
    assert report.mean_y_b == pytest.approx(0.9998106621446718, abs=1e-13)
    assert report.crossmoment_b == 0.0 and report.signed_crossmoment == 0.0


def test_exact_noise_free():
    params = PAPER_PARAMS.replace(eps_c=0.0, eps_t=0.0)
    report = analytic_report_exact(params)
    assert report.prob_b == params.p
    assert report.mean_x_b == 0.5
    assert report.mean_y_b == 0.0


@pytest.mark.parametrize("seed", range(20))
def test_exact_matches_quadrature(seed):
    params = random_params(np.random.default_rng(seed))
    exact = analytic_report_exact(params)
    quad = analytic_report_quadrature(params, tol=1e-8)
    for name in ("prob_b", "mean_x_b", "mean_y_b", "crossmoment_b"):
        assert abs(getattr(exact, name) - getattr(quad, name)) <= 1e-8, name
    assert abs(quad.signed_crossmoment) <= 1e-8
    assert max(quad.abs_errors.values()) <= 1e-8


def test_quadrature_reference_set():
    exact = analytic_report_exact(PAPER_PARAMS)
    quad = analytic_report_quadrature(PAPER_PARAMS, tol=1e-8)
    assert quad.method is Method.QUADRATURE and quad.quadrature_tol == 1e-8
    assert abs(quad.prob_b - exact.prob_b) <= 1e-8
    assert abs(quad.mean_x_b - exact.mean_x_b) <= 1e-8
    assert abs(quad.mean_y_b - exact.mean_y_b) <= 1e-8
    assert abs(quad.crossmoment_b) <= 1e-8
    assert abs(quad.crossmoment_not_b) <= 1e-8


def test_quadrature_noise_free():
    params = PAPER_PARAMS.replace(eps_c=0.0, eps_t=0.0)
    assert analytic_report_quadrature(params, 1e-10).prob_b == pytest.approx(params.p, abs=1e-10)


def test_quadrature_always_post_selected():
    report = analytic_report_quadrature(DESK_EIGHT.replace(p=1.0), 1e-8)
    assert report.prob_b == pytest.approx(1.0, abs=1e-8)
    assert report.crossmoment_not_b is None


def test_quadrature_unreachable_tolerance():
    with pytest.raises(QuadratureError) as info:
        analytic_report_quadrature(PAPER_PARAMS, tol=1e-22)
    assert info.value.achieved > 1e-22


def test_quadrature_rejects_bad_tol():
    with pytest.raises(ValueError):
        analytic_report_quadrature(PAPER_PARAMS, tol=0.0)


def test_leading_order_within_one_percent_at_reference_set():
    quad = analytic_report_quadrature(PAPER_PARAMS, tol=1e-8)
    assert abs(mean_x_postselected_approx(PAPER_PARAMS) - quad.mean_x_b) / quad.mean_x_b <= 0.01
    assert abs(mean_y_postselected_approx(PAPER_PARAMS) - quad.mean_y_b) / quad.mean_y_b <= 0.01


@settings(max_examples=50)
@given(eps=st.floats(0.0, 0.9), bump=st.floats(1e-3, 0.1))
def test_prob_b_increases_with_eps_c(eps, bump):
    lo = postselect_prob_exact(DESK_EIGHT.replace(eps_c=eps))
    hi = postselect_prob_exact(DESK_EIGHT.replace(eps_c=eps + bump))
    assert hi > lo


@pytest.mark.parametrize("seed", range(20))
def test_approx_and_exact_prob_identical(seed):
    params = random_params(np.random.default_rng(100 + seed))
    assert postselect_prob_approx(params) == pytest.approx(postselect_prob_exact(params), abs=1e-12)


def test_exact_helpers_consistent():
    report = analytic_report_exact(DESK_EIGHT)
    assert mean_x_postselected_exact(DESK_EIGHT) == report.mean_x_b
    assert mean_y_postselected_exact(DESK_EIGHT) == report.mean_y_b


def test_report_dispatch_and_serialisation():
    assert analytic_report(PAPER_PARAMS, "paper-approx").method is Method.PAPER_APPROX
    doc = analytic_report(PAPER_PARAMS, "quadrature").to_dict()
    assert doc["method"] == "quadrature"
    with pytest.raises(ValueError):
        analytic_report(PAPER_PARAMS, "simpson")
