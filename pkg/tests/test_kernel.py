import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from levyadapt import build_kernel, convolve_kernels, eval_kernel, eval_scaled, kernel_fourier, kernel_moment
from levyadapt.errors import InvalidBandwidth, UnsupportedCombination
from levyadapt.kernel import (
    BaseDensity,
    kernel_from_record,
    kernel_norms,
    kernel_to_record,
    read_tabulated_csv,
)

import oracles

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# -- construction ----------------------------------------------------------------
def test_literal_terms():
    k = build_kernel(l=2, rule="literal")
    assert k.terms == ((2.0, 1.0), (-1.0, 2.0))


def test_convolution_power_terms():
    k = build_kernel(l=3)
    w, s = k.weights, k.scales
    np.testing.assert_allclose(w, [3.0, -3.0, 1.0])
    np.testing.assert_allclose(s, [1.0, math.sqrt(2), math.sqrt(3)])


def test_cauchy_convolution_power_uses_integer_scales(k2_cauchy):
    np.testing.assert_allclose(k2_cauchy.scales, [1.0, 2.0])


def test_order_one_is_base(k1):
    x = np.linspace(-4, 4, 17)
    np.testing.assert_allclose(eval_kernel(k1, x), np.exp(-x * x / 2) * INV_SQRT_2PI, rtol=1e-15)


@pytest.mark.parametrize("l", [1, 2, 3, 4])
@pytest.mark.parametrize("rule", ["literal", "convolution_power"])
def test_weights_sum_to_one(l, rule):
    assert math.isclose(build_kernel(l=l, rule=rule).weights.sum(), 1.0, abs_tol=1e-15)


def test_tabulated_convolution_power_rejected(tmp_path):
    path = tmp_path / "tri.csv"
    path.write_text("x,u\n-1,0\n0,1\n1,0\n")
    base = read_tabulated_csv(path)
    with pytest.raises(UnsupportedCombination):
        build_kernel(base, l=2, rule="convolution_power")
    k = build_kernel(base, l=2, rule="literal")
    assert abs(kernel_moment(k, 0) - 1.0) < 1e-8


@pytest.mark.parametrize("bad", [0, -1, 1.5])
def test_bad_order(bad):
    with pytest.raises(ValueError):
        build_kernel(l=bad)


def test_unknown_rule():
    with pytest.raises(ValueError):
        build_kernel(rule="magic")


# -- moments ---------------------------------------------------------------------
@pytest.mark.parametrize("rule", ["literal", "convolution_power"])
@pytest.mark.parametrize("family", ["gaussian", "cauchy"])
def test_unit_integral(rule, family):
    k = build_kernel(BaseDensity(family), l=2, rule=rule)
    assert abs(kernel_moment(k, 0) - 1.0) < 1e-8


@pytest.mark.parametrize("l", [2, 3])
def test_convolution_power_moments_vanish(l):
    k = build_kernel(l=l)
    for j in range(1, 2 * l):
        assert abs(kernel_moment(k, j)) < 1e-7, j


def test_literal_second_moment_is_minus_two(k2_literal):
    assert abs(kernel_moment(k2_literal, 2) - (-2.0)) < 1e-6


def test_fourth_moment_values(k2, k2_literal):
    # mpmath oracle: -6 for convolution-power scales, -42 for literal scales
    assert math.isclose(kernel_moment(k2, 4), -6.0, rel_tol=1e-8)
    assert math.isclose(kernel_moment(k2_literal, 4), -42.0, rel_tol=1e-8)


# -- evaluation ------------------------------------------------------------------
def test_literal_value_at_origin(k2_literal):
    assert math.isclose(eval_kernel(k2_literal, 0.0), 1.5 * INV_SQRT_2PI, rel_tol=1e-14)


def test_scaled_literal_matches_oracle(k2_literal):
    assert math.isclose(eval_scaled(k2_literal, 0.5, 0.5), oracles.LITERAL_L2_H05_X05, rel_tol=1e-13)


def test_scaled_identity_and_origin(k1, k2):
    x = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(eval_scaled(k2, 1.0, x), eval_kernel(k2, x))
    assert math.isclose(eval_scaled(k1, 2.0, 0.0), 0.5 * INV_SQRT_2PI, rel_tol=1e-15)


def test_tails_vanish(k2, k2_cauchy):
    assert abs(eval_kernel(k2, 60.0)) < 1e-300
    assert abs(eval_kernel(k2_cauchy, 1e6)) < 1e-11


@pytest.mark.parametrize("h", [0.0, -0.1])
def test_nonpositive_bandwidth(k2, h):
    with pytest.raises(InvalidBandwidth):
        eval_scaled(k2, h, 0.0)


@given(st.floats(-20, 20), st.sampled_from([1, 2, 3]), st.sampled_from(["literal", "convolution_power"]))
@settings(max_examples=60, deadline=None)
def test_matches_gaussian_oracle(x, l, rule):
    k = build_kernel(l=l, rule=rule)
    expected = oracles.gauss_kernel(x, oracles.gauss_terms(l, rule))
    assert math.isclose(eval_kernel(k, x), expected, rel_tol=1e-12, abs_tol=1e-300)


@given(st.floats(0.0, 15.0))
@settings(max_examples=50, deadline=None)
def test_kernel_is_even(x):
    k = build_kernel(l=3)
    assert eval_kernel(k, x) == eval_kernel(k, -x)


# -- Fourier transform -----------------------------------------------------------
def test_fourier_at_zero(k2, k2_literal, k2_cauchy):
    for k in (k2, k2_literal, k2_cauchy):
        assert abs(kernel_fourier(k, 0.0) - 1.0) < 1e-15


def test_fourier_series_convolution_power(k2):
    xi = np.array([1e-2, 2e-2])
    lead = (kernel_fourier(k2, xi).real - 1.0) / xi**4
    np.testing.assert_allclose(lead, -0.25, rtol=1e-3)


def test_fourier_series_literal(k2_literal):
    xi = np.array([1e-3, 1e-2])
    lead = (kernel_fourier(k2_literal, xi).real - 1.0) / xi**2
    np.testing.assert_allclose(lead, 1.0, rtol=1e-3)


def test_fourier_closed_forms(k2, k2_literal):
    xi = np.linspace(-6, 6, 25)
    np.testing.assert_allclose(kernel_fourier(k2, xi).real, 2 * np.exp(-xi**2 / 2) - np.exp(-xi**2), atol=1e-15)
    np.testing.assert_allclose(
        kernel_fourier(k2_literal, xi).real, 2 * np.exp(-xi**2 / 2) - np.exp(-2 * xi**2), atol=1e-15
    )


@pytest.mark.parametrize("family", ["gaussian", "cauchy"])
def test_fourier_pair(family):
    k = build_kernel(BaseDensity(family), l=2)
    # cauchy's transform decays like exp(-|xi|); 60 is ample for 1e-5
    U = 40.0 if family == "gaussian" else 60.0
    xi = np.linspace(0.0, U, 200_001)
    kf = kernel_fourier(k, xi).real
    for x in np.linspace(-4, 4, 64):
        inv = np.trapezoid(kf * np.cos(xi * x), xi) / math.pi
        assert abs(inv - eval_kernel(k, x)) < 1e-5, x


def test_tabulated_fourier_matches_quadrature(tmp_path):
    path = tmp_path / "tab.csv"
    x = np.linspace(-2, 2, 9)
    path.write_text("x,u\n" + "".join(f"{a},{max(0.0, 1 - abs(a) / 2)}\n" for a in x))
    base = read_tabulated_csv(path)
    for xi in (0.0, 0.3, 2.0, 7.5):
        re = quad(lambda t: base.pdf(t) * math.cos(xi * t), -2, 2, points=list(x), limit=200)[0]
        assert abs(base.fourier(xi).real - re) < 1e-10


# -- convolution profiles ---------------------------------------------------------
def test_profile_symmetric(k2):
    t = np.linspace(-3, 3, 101)
    np.testing.assert_allclose(convolve_kernels(k2, 0.2, 0.7)(t), convolve_kernels(k2, 0.7, 0.2)(t), atol=1e-12)


@pytest.mark.parametrize("family", ["gaussian", "cauchy"])
def test_profile_unit_integral(family):
    k = build_kernel(BaseDensity(family), l=2)
    prof = convolve_kernels(k, 0.3, 0.5)
    total = quad(prof, -np.inf, np.inf, epsabs=1e-13, limit=400)[0]
    assert abs(total - 1.0) < 1e-8


def test_profile_order_one_at_origin(k1):
    assert math.isclose(convolve_kernels(k1, 1.0, 1.0)(0.0), 1 / math.sqrt(4 * math.pi), rel_tol=1e-14)


def test_profile_matches_gaussian_oracle(k2):
    terms = oracles.gauss_terms(2)
    t = np.linspace(-2, 2, 41)
    expected = [oracles.gauss_profile(v, terms, 0.25, 0.6) for v in t]
    np.testing.assert_allclose(convolve_kernels(k2, 0.25, 0.6)(t), expected, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("family", ["gaussian", "cauchy"])
def test_numerical_profile_matches_analytic(family):
    k = build_kernel(BaseDensity(family), l=2)
    t = np.linspace(-1.5, 1.5, 61)
    a = convolve_kernels(k, 0.3, 0.45, method="analytic")(t)
    b = convolve_kernels(k, 0.3, 0.45, method="numerical")(t)
    assert np.max(np.abs(a - b)) < 1e-6


# -- norms -----------------------------------------------------------------------
def test_norms_order_one(k1):
    n = k1.norms
    assert math.isclose(n.L2_sq, 1 / (2 * math.sqrt(math.pi)), rel_tol=1e-8)
    assert math.isclose(n.L1, 1.0, rel_tol=1e-8)
    assert math.isclose(n.Linf, INV_SQRT_2PI, rel_tol=1e-8)


def test_norms_literal_linf_at_origin(k2_literal):
    grid = np.linspace(-10, 10, 200_001)
    brute = np.max(np.abs(eval_kernel(k2_literal, grid)))
    assert math.isclose(k2_literal.norms.Linf, brute, rel_tol=1e-9)
    assert math.isclose(k2_literal.norms.Linf, 1.5 * INV_SQRT_2PI, rel_tol=1e-9)


def test_norms_against_quadrature(k2):
    assert math.isclose(k2.norms.L2_sq, oracles.CONV_L2_SQ, rel_tol=1e-6)
    l1 = quad(lambda t: abs(eval_kernel(k2, t)), -np.inf, np.inf, limit=400, points=None)[0]
    assert math.isclose(k2.norms.L1, l1, rel_tol=1e-6)


def test_norms_idempotent():
    a, b = build_kernel(l=3), build_kernel(l=3)
    assert a.norms == b.norms
    assert kernel_norms(a) == a.norms


# -- serialisation ---------------------------------------------------------------
@pytest.mark.parametrize("family", ["gaussian", "cauchy"])
@pytest.mark.parametrize("rule", ["literal", "convolution_power"])
def test_record_round_trip(family, rule):
    k = build_kernel(BaseDensity(family, scale=1.5), l=3, rule=rule)
    back = kernel_from_record(kernel_to_record(k))
    assert back == k
    assert back.norms == k.norms


def test_record_tabulated_round_trip(tmp_path):
    path = tmp_path / "tri.csv"
    path.write_text("-1,0\n0,1\n1,0\n")
    k = build_kernel(read_tabulated_csv(path), l=2, rule="literal")
    rec = kernel_to_record(k)
    assert rec["table"] == str(path)
    assert kernel_from_record(rec) == k


def test_record_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown"):
        kernel_from_record({"base": "gaussian", "bandwidth": "1"})


def test_tabulated_is_renormalised(tmp_path):
    path = tmp_path / "box.csv"
    path.write_text("x,u\n-1,3\n1,3\n")
    base = read_tabulated_csv(path)
    assert math.isclose(np.trapezoid(base.values, base.nodes), 1.0, rel_tol=1e-15)
