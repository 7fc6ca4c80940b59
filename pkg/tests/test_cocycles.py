from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confschwarz import jets
from confschwarz.actions import Diffeo, act_operator, pull_operator
from confschwarz.cocycles import (A_operator, B_operator, CocycleError, DimensionError,
                                  audit_constants, coeff_A, coeff_B, eval_A, eval_a_inf, eval_B,
                                  eval_b_inf, eval_C, op_first, op_yamabe, osgood_stowe,
                                  projective_symbol, schwarzian_1d)
from confschwarz.fields import Field, random_symbol
from confschwarz.flatmodel import all_generators, flat_metric, projective_map
from confschwarz.geometry import Metric
from confschwarz.sampling import (random_conformal_map, random_diffeo, random_factor,
                                  random_metric)

F = Fraction
seeds = st.integers(0, 2 ** 16)


def close(a, b, tol):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.max(np.abs(a - b)) <= tol * max(1.0, np.max(np.abs(a)), np.max(np.abs(b)))


# -- coefficient tables ------------------------------------------------------------

def test_coefficient_A_is_two_minus_n_delta():
    assert coeff_A(3, F(1, 3))["c"] == 1
    assert coeff_A(4, 0)["c"] == 2


def test_coefficient_B_golden_values():
    assert coeff_B(4, 0).as_tuple() == (6, F(-3, 2), -6, -6, 12, F(4, 3))


def test_coefficient_B_needs_three_dimensions():
    with pytest.raises(DimensionError):
        coeff_B(2, 0)


@given(st.integers(3, 7), st.fractions(-2, 2, max_denominator=12))
def test_coefficients_are_exact_rationals(n, delta):
    cs = coeff_B(n, delta)
    assert all(isinstance(v, Fraction) for v in cs.as_tuple())
    assert cs["c1"] == 2 + n * (1 - 2 * delta)


def test_audit_recovers_printed_constants():
    A = audit_constants("A", 3, F(1, 3))
    assert not A.typo_flag and A.distance < 1e-5
    B = audit_constants("B", 4, 0)
    assert not B.typo_flag and B.distance < 1e-5


def test_audit_single_sample_is_inconclusive():
    assert audit_constants("B", 4, 0, samples=1).inconclusive


# -- classical Schwarzian ------------------------------------------------------------

def test_schwarzian_1d_reference_values():
    assert abs(schwarzian_1d(lambda t: (2 * t + 1) / (t + 3), 0.4)) < 1e-12
    assert schwarzian_1d(jets.exp, 0.3) == pytest.approx(-0.5)
    assert schwarzian_1d(lambda t: jets.sin(t) / jets.cos(t), 0.2) == pytest.approx(2.0)


# -- cocycle conditions --------------------------------------------------------------

@given(seeds, st.sampled_from([2, 3, 4]))
def test_A_cocycle(seed, n):
    rng = np.random.default_rng(seed)
    d = F(1, 3)
    g, f, h = random_metric(n, rng), random_diffeo(n, rng), random_diffeo(n, rng)
    P, x = random_symbol(n, 2, d, rng), rng.uniform(-0.2, 0.2, n)
    lhs = eval_A(f.compose(h), g, d, P, x).values
    rhs = pull_operator(h, A_operator(f, g, d, n))(P).jet(x, 0).value + eval_A(h, g, d, P, x).values
    assert close(lhs, rhs, 1e-8)


@given(seeds, st.sampled_from([3, 4]))
def test_B_cocycle(seed, n):
    rng = np.random.default_rng(seed)
    d = F(2, 5)
    g, f, h = random_metric(n, rng), random_diffeo(n, rng), random_diffeo(n, rng)
    P, x = random_symbol(n, 2, d, rng), rng.uniform(-0.2, 0.2, n)
    lhs = eval_B(f.compose(h), g, d, P, x).values
    rhs = pull_operator(h, B_operator(f, g, d, n))(P).jet(x, 0).value + eval_B(h, g, d, P, x).values
    assert close(lhs, rhs, 1e-8)


@pytest.mark.parametrize("n", [3, 4])
def test_rescaling_invariance(n, rng):
    d = F(1, 4)
    g, Fc, f = random_metric(n, rng), random_factor(n, rng), random_diffeo(n, rng)
    P, x = random_symbol(n, 2, d, rng), rng.uniform(-0.2, 0.2, n)
    assert close(eval_A(f, g, d, P, x).values, eval_A(f, g.rescaled(Fc), d, P, x).values, 1e-8)
    assert close(eval_B(f, g, d, P, x).values, eval_B(f, g.rescaled(Fc), d, P, x).values, 1e-8)


@pytest.mark.parametrize("signature", [(3, 0), (2, 1), (2, 2)])
def test_kernel_on_flat_conformal_maps(signature, rng):
    n = sum(signature)
    flat = flat_metric(*signature)
    d = F(1, 5)
    for _ in range(3):
        m = random_conformal_map(signature, rng)
        P, x = random_symbol(n, 2, d, rng), rng.uniform(-0.1, 0.1, n)
        assert np.max(np.abs(eval_A(m.diffeo, flat, d, P, x).values)) < 1e-8
        assert np.max(np.abs(eval_B(m.diffeo, flat, d, P, x).values)) < 1e-8


@pytest.mark.parametrize("signature", [(2, 1), (2, 2)])
def test_infinitesimal_kernel(signature, rng):
    n = sum(signature)
    flat, d = flat_metric(*signature), F(1, 5)
    P, x = random_symbol(n, 2, d, rng), rng.uniform(-0.2, 0.2, n)
    for gen in all_generators(signature):
        assert np.max(np.abs(eval_a_inf(gen.field, flat, d, P, x).values)) < 1e-8
        assert np.max(np.abs(eval_b_inf(gen.field, flat, d, P, x).values)) < 1e-8


def test_A_is_not_identically_zero(rng):
    f = Diffeo(lambda X: [X[0] + X[0] * X[0] / 2, X[1], X[2]])
    P = random_symbol(3, 2, F(1, 3), rng)
    assert np.max(np.abs(eval_A(f, flat_metric(3), F(1, 3), P, np.zeros(3)).values)) > 1e-3


@pytest.mark.parametrize("n", [3, 4])
def test_A_coboundary_at_two_over_n(n, rng):
    d = F(2, n)
    g, f = random_metric(n, rng), random_diffeo(n, rng)
    P, x = random_symbol(n, 2, d, rng), rng.uniform(-0.2, 0.2, n)
    L = op_first(g)
    cob = act_operator(f.inverse(), L)(P).jet(x, 0).value - L(P).jet(x, 0).value
    assert close(eval_A(f, g, d, P, x).values, cob, 1e-9)


@pytest.mark.parametrize("n", [3, 4])
def test_B_yamabe_coboundary(n, rng):
    d = F(n + 2, 2 * n)
    g, f = random_metric(n, rng), random_diffeo(n, rng)
    P, x = random_symbol(n, 2, d, rng), rng.uniform(-0.2, 0.2, n)
    Y = op_yamabe(g, n)
    cob = act_operator(f.inverse(), Y)(P).jet(x, 0).value - Y(P).jet(x, 0).value
    assert close(eval_B(f, g, d, P, x).values, cob, 1e-8)


def test_C_vanishes_on_projective_maps():
    M = np.array([[1, 0.1, 0.2, 0.05], [0.1, 1.1, 0, 0.1], [0.05, 0.02, 0.9, 0.1],
                  [0.1, -0.1, 0.05, 1]])
    x = np.array([0.1, -0.1, 0.05])
    assert np.max(np.abs(eval_C(projective_map(M), flat_metric(3), x).values)) < 1e-8


def test_C_example_value():
    f = Diffeo(lambda X: [X[0] + X[0] ** 2 / 2, X[1]])
    val = eval_C(f, flat_metric(2), np.zeros(2)).values[0, 0, 0]
    assert val == pytest.approx(1 / 3)


def test_projective_symbol_is_traceless():
    G = np.random.default_rng(0).normal(size=(3, 3, 3))
    G = G + G.transpose(0, 2, 1)
    Pi = np.asarray(projective_symbol(G))
    assert np.max(np.abs(np.einsum("kkj->j", Pi))) < 1e-12


def test_osgood_stowe_example():
    Fe = Field.from_function(lambda X: jets.exp(X[0] * 2.0))
    S = osgood_stowe(Fe, flat_metric(2), np.array([0.2, -0.1])).values
    assert np.allclose(S, np.diag([-0.5, 0.5]), atol=1e-10)


def test_cocycle_errors_are_typed(rng):
    g = Metric.from_function(lambda X: [[1 + X[0] * 0, X[0] * 0], [X[0] * 0, 1 + X[0] * 0]])
    with pytest.raises(CocycleError):
        eval_B(random_diffeo(2, rng), g, F(1, 3), random_symbol(2, 2, F(1, 3), rng), np.zeros(2))
