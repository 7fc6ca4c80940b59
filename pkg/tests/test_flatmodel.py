import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confschwarz.actions import Diffeo
from confschwarz.flatmodel import (FlatModelError, all_generators, compose_maps, conformal_map,
                                   eta, flat_metric, is_conformal, projective_map)
from confschwarz.sampling import random_conformal_map

signatures = st.sampled_from([(2, 0), (3, 0), (2, 1), (2, 2), (3, 1)])


@pytest.mark.parametrize("signature, count", [((2, 1), 10), ((3, 0), 10), ((2, 2), 15),
                                              ((4, 0), 15)])
def test_generator_count(signature, count):
    assert len(all_generators(signature)) == count


@given(signatures, st.integers(0, 2 ** 16))
def test_composites_are_conformal(signature, seed):
    rng = np.random.default_rng(seed)
    n = sum(signature)
    m = random_conformal_map(signature, rng)
    res = is_conformal(m.diffeo, flat_metric(*signature), rng.uniform(-0.1, 0.1, (3, n)))
    assert res.conformal and res.worst_residual < 1e-9


def test_quadratic_map_is_not_conformal():
    f = Diffeo(lambda X: [X[0] + X[0] * X[0] / 2, X[1]])
    assert not is_conformal(f, flat_metric(2), [np.array([0.1, 0.2])]).conformal


def test_special_conformal_factor():
    b = np.array([0.2, 0.0, 0.1])
    m = conformal_map("special-conformal", {"b": b}, (2, 1))
    x = np.array([0.1, 0.3, -0.2])
    e = eta(2, 1)
    xx, bx, bb = x @ e @ x, b @ e @ x, b @ e @ b
    expected = (x - b * xx) / (1 - 2 * bx + bb * xx)
    assert np.allclose(m.diffeo(x), expected)


def test_special_conformal_singular_locus():
    m = conformal_map("special-conformal", {"b": [1.0, 0.0]}, (2, 0))
    with pytest.raises(FlatModelError):
        m.check_probe(np.array([1.0, 0.0]))


def test_invalid_parameters_are_rejected():
    with pytest.raises(FlatModelError):
        conformal_map("dilation", {"a": -1.0}, (2, 0))
    with pytest.raises(FlatModelError):
        conformal_map("linear-orthogonal", {"A": [[1.0, 0.5], [0.0, 1.0]]}, (2, 0))
    with pytest.raises(FlatModelError):
        conformal_map("translation", {"v": [1.0]}, (2, 0))


def test_hyperbolic_rotation_preserves_the_form():
    m = conformal_map("rotation", {"plane": (0, 2), "angle": 0.7}, (2, 1))
    J = m.diffeo.jet(np.zeros(3), 1)
    from confschwarz import jets
    D = np.asarray(jets.jacobian(J).value)
    assert np.allclose(D.T @ eta(2, 1) @ D, eta(2, 1))


def test_compose_maps_applies_right_to_left():
    t = conformal_map("translation", {"v": [1.0, 0.0]}, (2, 0))
    d = conformal_map("dilation", {"a": 2.0}, (2, 0))
    assert np.allclose(compose_maps(t, d).diffeo(np.array([1.0, 1.0])), [3.0, 2.0])


def test_projective_map_action():
    M = np.array([[2.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.5, 0.0, 1.0]])
    f = projective_map(M)
    assert np.allclose(f(np.array([0.2, 0.4])), [1.4 / 1.1, 0.4 / 1.1])
