import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confschwarz import jets
from confschwarz.actions import (Diffeo, act_operator, ell, ell_field, flow_diffeo, flow_map,
                                 lie_connection, pull, pull_operator, pullback_density, push)
from confschwarz.fields import Field, random_density, random_symbol
from confschwarz.flatmodel import flat_metric
from confschwarz.sampling import random_diffeo, random_metric

seeds = st.integers(0, 2 ** 16)


def test_ell_of_identity_vanishes(rng):
    g = random_metric(3, rng)
    assert np.max(np.abs(ell(Diffeo.identity(3), g, np.full(3, 0.1)).jet.value)) == 0


def test_one_dimensional_ell_is_log_derivative():
    f = Diffeo(lambda X: [X[0] + X[0] * X[0] / 2])
    assert ell(f, flat_metric(1), np.zeros(1)).jet.value[0, 0, 0] == pytest.approx(1.0)


def test_density_actions_of_dilation():
    f = Diffeo(lambda X: [X[0] * 2.0], lambda Y: [Y[0] * 0.5])
    phi = Field.from_function(lambda X: X[0] * X[0] + 1.0, "", 1)
    x = np.array([0.3])
    assert pull(f, phi).jet(x, 0).value == pytest.approx((0.36 + 1) * 2)
    # the natural action uses f^-1
    assert pullback_density(f, phi, x, 0).value == pytest.approx((0.0225 + 1) * 0.5)


@given(seeds)
def test_ell_cocycle(seed):
    rng = np.random.default_rng(seed)
    g, f, h = random_metric(3, rng), random_diffeo(3, rng), random_diffeo(3, rng)
    x = rng.uniform(-0.2, 0.2, 3)
    lhs = ell_field(f.compose(h), g).jet(x, 0).value
    rhs = (pull(h, ell_field(f, g)).jet(x, 0) + ell_field(h, g).jet(x, 0)).value
    assert np.max(np.abs(lhs - rhs)) < 1e-8


@given(seeds)
def test_pull_is_right_action_and_push_inverts(seed):
    rng = np.random.default_rng(seed)
    f, h = random_diffeo(3, rng), random_diffeo(3, rng)
    P = random_symbol(3, 2, 0.3, rng)
    x = rng.uniform(-0.2, 0.2, 3)
    a = pull(f.compose(h), P).jet(x, 0).value
    b = pull(h, pull(f, P)).jet(x, 0).value
    assert np.max(np.abs(a - b)) < 1e-10
    assert np.max(np.abs(push(f, pull(f, P)).jet(x, 0).value - P.jet(x, 0).value)) < 1e-10


def test_operator_actions_are_mutually_inverse(rng):
    f = random_diffeo(2, rng)
    phi = random_density(2, 0.5, rng)
    x = np.array([0.05, -0.1])

    def A(u):
        return Field(lambda y, k: u.jet(y, k) * u.jet(y, k), "", u.weight)

    both = pull_operator(f, act_operator(f, A))
    assert float(both(phi).jet(x, 0).value) == pytest.approx(float(A(phi).jet(x, 0).value))


def test_flow_of_constant_field_is_translation():
    X = Field.from_function(lambda Y: [Y[0] * 0 + 1.0, Y[0] * 0], "u")
    J = flow_map(X, 0.5, np.array([0.1, 0.2]), 2)
    assert np.allclose(J.value, [0.6, 0.2])


def test_ell_flow_derivative_is_lie_derivative(rng):
    g = random_metric(3, rng)
    X = Field.from_function(lambda Y: [Y[1] ** 2 * 0.3, Y[0] * Y[2] * 0.2 + 0.1, Y[0] ** 2 * 0.1],
                            "u")
    x = np.array([0.1, -0.05, 0.08])
    t = 1e-3
    d = (ell_field(flow_diffeo(X, t), g).jet(x, 0).value
         - ell_field(flow_diffeo(X, -t), g).jet(x, 0).value) / (2 * t)
    assert np.max(np.abs(d - lie_connection(X, g, x))) < 1e-5


def test_inverse_diffeo_round_trip(rng):
    f = random_diffeo(3, rng)
    y = f(np.array([0.1, 0.0, -0.1]))
    assert np.allclose(f.preimage(y), [0.1, 0.0, -0.1], atol=1e-12)
    assert f.check(np.array([0.1, 0.0, -0.1])) < 1e-10
