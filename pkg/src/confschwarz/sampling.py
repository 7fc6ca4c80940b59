"""Seeded random inputs: metrics, conformal factors, diffeomorphisms, conformal maps.

Polynomial coefficients are drawn uniformly from small symmetric intervals so
that every jet stays well conditioned near the origin.
"""

from __future__ import annotations

import numpy as np

from . import jets
from .actions import Diffeo
from .fields import Field, random_polynomial
from .flatmodel import FlatConformalMap, compose_maps, conformal_map
from .geometry import Metric

__all__ = ["random_metric", "random_factor", "random_diffeo", "random_conformal_map",
           "random_points"]


def random_metric(n: int, rng: np.random.Generator, signature: tuple[int, int] | None = None,
                  scale: float = 0.15) -> Metric:
    """``diag(+-(1 + 0.3 i)) + quadratic perturbation`` with the given signature."""
    signature = signature or (n, 0)
    signs = [1.0] * signature[0] + [-1.0] * signature[1]
    polys = {(i, j): random_polynomial(n, 2, rng, scale) for i in range(n) for j in range(i, n)}

    def func(X):
        return [[(signs[i] * (1.0 + i * 0.3) if i == j else 0.0) + polys[min(i, j), max(i, j)](X)
                 for j in range(n)] for i in range(n)]

    return Metric.from_function(func, signature, label="random")


def random_factor(n: int, rng: np.random.Generator, scale: float = 0.3) -> Field:
    """Positive conformal factor ``exp(p(x))`` with ``p`` a random quadratic."""
    p = random_polynomial(n, 2, rng, scale)
    return Field.from_function(lambda X: jets.exp(p(X)), "", 0, "F")


def random_diffeo(n: int, rng: np.random.Generator, scale: float = 0.12) -> Diffeo:
    """Identity plus a random polynomial of degree at most three fixing the origin."""
    polys = [random_polynomial(n, 3, rng, scale) for _ in range(n)]

    def func(X):
        return [X[i] + polys[i](X) - polys[i].coeffs.get((0,) * n, 0.0) for i in range(n)]

    return Diffeo(func, label="random")


def random_conformal_map(signature: tuple[int, int], rng: np.random.Generator,
                         size: float = 0.15) -> FlatConformalMap:
    """Composite of a special conformal map, a rotation, a dilation and a translation."""
    n = sum(signature)
    b = rng.uniform(-size, size, n)
    i, j = sorted(rng.choice(n, 2, replace=False)) if n > 1 else (0, 0)
    parts = [conformal_map("special-conformal", {"b": b}, signature)]
    if n > 1:
        parts.append(conformal_map("rotation", {"plane": (int(i), int(j)),
                                                "angle": float(rng.uniform(-0.6, 0.6))}, signature))
    parts.append(conformal_map("dilation", {"a": float(rng.uniform(0.7, 1.4))}, signature))
    parts.append(conformal_map("translation", {"v": rng.uniform(-size, size, n)}, signature))
    return compose_maps(*parts)


def random_points(n: int, count: int, rng: np.random.Generator, radius: float = 0.2) -> np.ndarray:
    return rng.uniform(-radius, radius, (count, n))
