"""Jet-evaluable fields: the common currency of every operator in the package.

A :class:`Field` is anything that can produce its Taylor expansion at a point
to a requested order.  Leaf fields wrap analytic functions of coordinate jets;
derived fields (push-forwards, covariant derivatives, operator outputs) are
built from other fields and request the extra orders they consume.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import jets
from .jets import Jet

__all__ = ["Field", "as_jet_tensor", "Polynomial", "random_polynomial", "random_symbol",
           "random_density"]


class Field:
    """Tensor density field with jets available at any point.

    Args:
        fn: ``fn(x, order) -> Jet`` producing the expansion at ``x``.
        kinds: one letter per tensor axis, ``"u"`` contravariant, ``"d"``
            covariant.  ``None`` marks a map (tuple of functions, no tensor law).
        weight: density weight.
        label: free text for reports.
    """

    def __init__(self, fn: Callable[[np.ndarray, int], Jet], kinds: str | None = "",
                 weight=0, label: str = ""):
        self._fn = fn
        self.kinds = kinds
        self.weight = Fraction(weight) if not isinstance(weight, float) else weight
        self.label = label
        self._cache: dict[bytes, Jet] = {}

    @classmethod
    def from_function(cls, func: Callable[[Jet], object], kinds: str | None = "",
                      weight=0, label: str = "") -> "Field":
        """Leaf field from an analytic function of the coordinate jet vector."""

        def fn(x, order):
            return jets.jet_lift(lambda X: as_jet_tensor(func(X), X), x, order)

        return cls(fn, kinds, weight, label)

    @classmethod
    def constant(cls, value, kinds: str | None = "", weight=0, label: str = "") -> "Field":
        value = np.asarray(value, dtype=float)

        def fn(x, order):
            return jets.constant(value, jets.coordinates(x, order)[0])

        return cls(fn, kinds, weight, label)

    def jet(self, x, order: int) -> Jet:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        key = x.tobytes()
        hit = self._cache.get(key)
        if hit is not None and hit.order >= order:
            return hit.truncate(order)
        out = self._fn(x, order)
        if out.order < order:
            raise jets.OrderBudgetError(
                f"field {self.label or '?'} produced order {out.order} < {order}", needed=order
            )
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = out
        return out.truncate(order) if out.order > order else out

    def __call__(self, x):
        """Value at a point."""
        return self.jet(x, 0).value

    def with_meta(self, kinds=None, weight=None, label=None) -> "Field":
        return Field(
            self.jet,
            self.kinds if kinds is None else kinds,
            self.weight if weight is None else weight,
            self.label if label is None else label,
        )

    # Pointwise algebra.  The result keeps the kinds/weight of ``self``.
    def _binary(self, other, op) -> "Field":
        if isinstance(other, Field):
            return Field(lambda x, k: op(self.jet(x, k), other.jet(x, k)),
                         self.kinds, self.weight, self.label)
        return Field(lambda x, k: op(self.jet(x, k), other), self.kinds, self.weight, self.label)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(lambda x, k: -self.jet(x, k), self.kinds, self.weight, self.label)

    def __repr__(self) -> str:
        return f"Field({self.label!r}, kinds={self.kinds!r}, weight={self.weight})"


def as_jet_tensor(obj, like: Jet) -> Jet:
    """Turn a Jet or a nested sequence of Jets and numbers into one tensor Jet."""
    if isinstance(obj, Jet):
        return obj
    if isinstance(obj, (list, tuple)):
        return jets.stack([as_jet_tensor(o, like) for o in obj])
    if isinstance(obj, np.ndarray) and obj.dtype == object:
        return jets.stack([as_jet_tensor(o, like) for o in obj])
    return jets.constant(obj, like[0] if like.shape else like)


class Polynomial:
    """Dense polynomial in ``n`` variables, evaluable on jets and floats."""

    def __init__(self, n: int, coeffs: dict[tuple[int, ...], float]):
        self.n = n
        self.coeffs = {tuple(a): float(c) for a, c in coeffs.items() if c != 0.0}

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=0)

    def __call__(self, X):
        if isinstance(X, Jet):
            total = jets.constant(0.0, X[0])
            powers: dict[tuple[int, int], Jet] = {}

            def pw(i, e):
                if e == 0:
                    return None
                if (i, e) not in powers:
                    prev = pw(i, e - 1)
                    powers[(i, e)] = X[i] if prev is None else prev * X[i]
                return powers[(i, e)]

            for alpha, c in self.coeffs.items():
                term = None
                for i, e in enumerate(alpha):
                    p = pw(i, e)
                    if p is not None:
                        term = p if term is None else term * p
                total = total + (c if term is None else term * c)
            return total
        x = np.asarray(X, dtype=float)
        return sum(c * float(np.prod(x ** np.array(a))) for a, c in self.coeffs.items())

    def __repr__(self) -> str:
        return f"Polynomial(n={self.n}, terms={len(self.coeffs)})"


def _indices_up_to(n: int, degree: int):
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            a = [0] * n
            for i in combo:
                a[i] += 1
            yield tuple(a)


def random_polynomial(n: int, degree: int, rng: np.random.Generator,
                      scale: float = 0.5) -> Polynomial:
    """Polynomial with coefficients uniform in ``[-scale, scale]``."""
    coeffs = {a: rng.uniform(-scale, scale) for a in _indices_up_to(n, degree)}
    return Polynomial(n, coeffs)


def random_symbol(n: int, degree: int, weight, rng: np.random.Generator,
                  poly_degree: int = 3) -> Field:
    """Random symmetric contravariant tensor density with polynomial components."""
    comps = {}
    for idx in itertools.combinations_with_replacement(range(n), degree):
        comps[idx] = random_polynomial(n, poly_degree, rng)

    def func(X):
        if degree == 0:
            return comps[()](X)
        vals = {k: p(X) for k, p in comps.items()}
        out = np.empty((n,) * degree, dtype=object)
        for idx in itertools.product(range(n), repeat=degree):
            out[idx] = vals[tuple(sorted(idx))]
        return out.tolist()

    return Field.from_function(func, "u" * degree, weight, label=f"P{degree}")


def random_density(n: int, weight, rng: np.random.Generator, poly_degree: int = 3) -> Field:
    p = random_polynomial(n, poly_degree, rng)
    return Field.from_function(lambda X: p(X), "", weight, label="phi")
