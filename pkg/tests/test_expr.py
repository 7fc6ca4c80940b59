import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confschwarz import expr as E
from confschwarz import jets


def test_precedence_and_folding():
    assert E.eval_expr(E.parse("-2^2", 1), {}, np.zeros(1)) == -4
    assert E.eval_expr(E.parse("2^3^2", 1), {}, np.zeros(1)) == 512
    assert E.parse("3/2", 1) == E.Const(Fraction(3, 2))


def test_variables_and_parameters():
    node = E.parse("a*x1 + x2^2", 2, {"a"})
    assert E.parameters(node) == {"a"}
    assert E.eval_expr(node, {"a": 0.5}, np.array([2.0, 3.0])) == pytest.approx(10.0)
    with pytest.raises(E.UnboundParameterError):
        E.eval_expr(node, {}, np.zeros(2))


def test_syntax_error_offset():
    with pytest.raises(E.ExprSyntaxError) as exc:
        E.parse("x1 +", 2)
    assert exc.value.offset == 4


def test_variable_out_of_range():
    with pytest.raises(E.UnknownIdentifier) as exc:
        E.parse("x1 + x3", 2)
    assert exc.value.name == "x3"


def test_unknown_function():
    with pytest.raises(E.UnknownIdentifier):
        E.parse("foo(x1)", 1)


def test_jet_evaluation_exp():
    J = E.eval_expr_jet(E.parse("exp(2*x1)", 1), {}, np.zeros(1), 3)
    coeffs = [jets.jet_derivative(J, (k,)) / math.factorial(k) for k in range(4)]
    assert np.allclose(coeffs, [1, 2, 2, 4 / 3])


def test_domain_error():
    with pytest.raises(E.ExprDomainError):
        E.eval_expr_jet(E.parse("sqrt(x1)", 1), {}, np.zeros(1), 2)


def _exprs():
    leaf = st.sampled_from(["x1", "x2", "1", "3/2", "a"])
    return st.recursive(leaf, lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from("+-*"), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        inner.map(lambda s: f"sin({s})"),
        inner.map(lambda s: f"-{s}"),
        inner.map(lambda s: f"({s})^2"),
    ), max_leaves=6)


@given(_exprs())
def test_pretty_round_trip(src):
    node = E.parse(src, 2, {"a"})
    again = E.parse(E.pretty(node), 2, {"a"})
    assert again == node
    x = np.array([0.3, -0.7])
    assert E.eval_expr(again, {"a": 0.25}, x) == pytest.approx(E.eval_expr(node, {"a": 0.25}, x))


@given(_exprs())
def test_jet_value_matches_float_evaluation(src):
    node = E.parse(src, 2, {"a"})
    x = np.array([0.3, -0.7])
    J = E.eval_expr_jet(node, {"a": 0.25}, x, 2)
    assert float(J.value) == pytest.approx(E.eval_expr(node, {"a": 0.25}, x), abs=1e-12)
