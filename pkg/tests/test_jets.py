"""Truncated Taylor arithmetic against independent closed forms and differences."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confschwarz import jets
from confschwarz.fields import random_polynomial

points = st.lists(st.floats(-0.4, 0.4), min_size=2, max_size=2).map(np.array)


def taylor(j, alpha):
    """Plain Taylor coefficient: derivative divided by alpha!."""
    return jets.jet_derivative(j, alpha) / math.prod(math.factorial(a) for a in alpha)


@given(points)
def test_exp_series_matches_closed_form(x):
    X = jets.coordinates(x, 5)
    e = jets.exp(X[0] * 2.0 + X[1])
    base = math.exp(2 * x[0] + x[1])
    for a in range(4):
        for b in range(5 - a - 1):
            assert taylor(e, (a, b)) == pytest.approx(base * 2 ** a / math.factorial(a)
                                                      / math.factorial(b), rel=1e-12)


def test_one_variable_product_matches_numpy_convolution():
    p, q = [0.3, -1.0, 0.5, 2.0], [1.0, 0.25, -0.75, 0.1]
    X = jets.coordinates(np.zeros(1), 6)
    P = sum((X[0] ** k * c for k, c in enumerate(p[1:], 1)), jets.constant(p[0], X[0]))
    Q = sum((X[0] ** k * c for k, c in enumerate(q[1:], 1)), jets.constant(q[0], X[0]))
    expected = np.polynomial.polynomial.polymul(p, q)
    got = [taylor(P * Q, (k,)) for k in range(7)]
    assert np.allclose(got, expected, atol=1e-14)


@pytest.mark.parametrize("fn, ref", [
    (jets.log, lambda k, a: (-1) ** (k + 1) * math.factorial(k - 1) / a ** k if k else math.log(a)),
    (jets.sqrt, None),
])
def test_univariate_functions_against_derivative_formulas(fn, ref):
    a = 1.3
    X = jets.coordinates(np.array([a]), 4)
    j = fn(X[0])
    if ref is not None:
        for k in range(5):
            assert jets.jet_derivative(j, (k,)) == pytest.approx(ref(k, a), rel=1e-12)
    else:
        assert (j * j).value == pytest.approx(a)
        assert jets.jet_derivative(j * j, (1,)) == pytest.approx(1.0)
        assert abs(jets.jet_derivative(j * j, (3,))) < 1e-12


@given(points)
def test_sin_cos_identity(x):
    X = jets.coordinates(x, 5)
    u = X[0] * X[1] + X[0]
    one = jets.sin(u) * jets.sin(u) + jets.cos(u) * jets.cos(u)
    assert abs(one.value - 1.0) < 1e-14
    assert np.max(np.abs(one.coeffs[1:])) < 1e-13


def test_inverse_map_composes_to_identity():
    x = np.array([0.1, 0.2])
    J = jets.jet_lift(lambda Y: [Y[0] + Y[1] ** 2, Y[1] + 0.1 * Y[0] ** 3], x, 4)
    inv = jets.jet_invert_map(J)
    C = jets.jet_compose(inv, J)
    ident = jets.coordinates(x, 4)
    assert np.max(np.abs(C.coeffs - ident.coeffs)) < 1e-12


def test_composition_chain_rule():
    x = np.array([0.2, -0.1])
    inner = jets.jet_lift(lambda Y: [Y[0] * Y[1], Y[0] + jets.sin(Y[1])], x, 4)
    outer = jets.jet_lift(lambda Y: jets.exp(Y[0]) * Y[1], inner.value, 4)
    direct = jets.jet_lift(lambda Y: jets.exp(Y[0] * Y[1]) * (Y[0] + jets.sin(Y[1])), x, 4)
    assert np.max(np.abs(jets.jet_compose(outer, inner).coeffs - direct.coeffs)) < 1e-13


def test_jacobian_determinant():
    J = jets.jet_lift(lambda Y: [Y[0] + Y[1] ** 2, Y[1] + 0.1 * Y[0] ** 3], np.array([0.1, 0.2]), 3)
    assert jets.det(jets.jacobian(J)).value == pytest.approx(1 - 2 * 0.2 * 0.3 * 0.1 ** 2)


@pytest.mark.parametrize("seed", range(50))
def test_derivatives_match_central_differences(seed):
    rng = np.random.default_rng(seed)
    n = 1 + seed % 3
    p = random_polynomial(n, 4, rng)
    x = rng.uniform(-0.3, 0.3, n)
    J = jets.jet_lift(lambda Y: jets.exp(p(Y) * 0.5), x, 2)
    f = lambda y: math.exp(0.5 * p(y))  # noqa: E731
    h = 1e-4
    for i in range(n):
        e = np.eye(n)[i] * h
        alpha = tuple(int(k == i) for k in range(n))
        fd = (f(x + e) - f(x - e)) / (2 * h)
        assert abs(jets.jet_derivative(J, alpha) - fd) < 1e-5
        fd2 = (f(x + e) - 2 * f(x) + f(x - e)) / h ** 2
        assert abs(jets.jet_derivative(J, tuple(2 * a for a in alpha)) - fd2) < 1e-5


def test_order_budget_reports_needed_order():
    with jets.order_budget(2):
        assert jets.current_budget() == 2
        with pytest.raises(jets.OrderBudgetError) as exc:
            jets.jet_lift(lambda Y: Y[0], np.zeros(2), 3)
    assert exc.value.needed == 3
    assert jets.current_budget() == jets.DEFAULT_ORDER


def test_nonfinite_coefficient_is_reported():
    with pytest.raises(jets.JetError):
        jets.jet_lift(lambda Y: jets.log(Y[0]), np.zeros(1), 2)
