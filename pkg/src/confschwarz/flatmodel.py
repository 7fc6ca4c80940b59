"""The flat model R^{p,q}: flat metrics, the conformal transformation catalog,
its Lie-algebra generators, projective maps and a conformality detector."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .actions import Diffeo, VectorField, pull
from .fields import Field
from .geometry import Metric

__all__ = [
    "FlatModelError",
    "FlatConformalMap",
    "ConformalGenerator",
    "ConformalityResult",
    "flat_metric",
    "eta",
    "conformal_map",
    "compose_maps",
    "conformal_generator",
    "all_generators",
    "is_conformal",
    "projective_map",
    "MAP_KINDS",
    "GENERATOR_KINDS",
]

MAP_KINDS = ("translation", "linear-orthogonal", "rotation", "dilation", "special-conformal")
GENERATOR_KINDS = ("translation", "rotation", "dilation", "special-conformal")
SINGULAR_TOL = 1e-8


class FlatModelError(ValueError):
    """Invalid catalog parameters or a probe on a singular locus."""


def eta(p: int, q: int) -> np.ndarray:
    if p < 0 or q < 0 or p + q < 1:
        raise FlatModelError(f"invalid signature ({p}, {q})")
    return np.diag([1.0] * p + [-1.0] * q)


def flat_metric(p: int, q: int = 0) -> Metric:
    """Constant metric ``diag(1, ..., 1, -1, ..., -1)``."""
    e = eta(p, q)
    return Metric(Field.constant(e, "dd", label=f"eta({p},{q})"), (p, q),
                  label=f"flat({p},{q})", flat=True)


def _form(e: np.ndarray, a, b):
    n = e.shape[0]
    out = None
    for i in range(n):
        if e[i, i] == 0:
            continue
        t = a[i] * b[i] * e[i, i]
        out = t if out is None else out + t
    return out


@dataclass
class FlatConformalMap:
    """A cataloged element of the conformal group acting on an affine chart."""

    kind: str
    params: dict
    signature: tuple[int, int]
    diffeo: Diffeo
    singular: str = ""

    def __call__(self, x):
        return self.diffeo(x)

    def check_probe(self, x) -> None:
        if self.kind == "special-conformal":
            e = eta(*self.signature)
            b = np.asarray(self.params["b"], float)
            x = np.asarray(x, float)
            den = 1 - 2 * b @ e @ x + (b @ e @ b) * (x @ e @ x)
            if abs(den) < SINGULAR_TOL:
                raise FlatModelError(f"probe {x} lies on the singular locus {self.singular}")


def _special_conformal(e: np.ndarray, b: np.ndarray):
    n = e.shape[0]
    bb = float(b @ e @ b)

    def fn(X):
        xx = _form(e, X, X)
        bx = _form(e, b, X)
        den = 1 - 2 * bx + xx * bb
        return [(X[i] - xx * b[i]) / den for i in range(n)]

    return fn


def conformal_map(kind: str, params: dict | None = None, signature: tuple[int, int] = (2, 0)
                  ) -> FlatConformalMap:
    """Catalog entry.

    Kinds and parameters: ``translation`` (``v``), ``linear-orthogonal`` (``A``
    with ``A^T eta A = eta``), ``rotation`` (plane ``(i, j)`` and ``angle``;
    hyperbolic when the form has opposite signs on the plane), ``dilation``
    (``a > 0``), ``special-conformal`` (``b``).
    """
    params = dict(params or {})
    p, q = signature
    e = eta(p, q)
    n = p + q
    if kind == "translation":
        v = np.asarray(params.get("v", np.zeros(n)), float)
        _check_len(v, n, "v")
        d = Diffeo(lambda X: [X[i] + v[i] for i in range(n)],
                   lambda X: [X[i] - v[i] for i in range(n)], label="translation")
        return FlatConformalMap(kind, {"v": v}, signature, d)
    if kind == "dilation":
        a = float(params.get("a", 1.0))
        if a <= 0:
            raise FlatModelError("dilation factor must be positive")
        d = Diffeo(lambda X: [X[i] * a for i in range(n)],
                   lambda X: [X[i] * (1 / a) for i in range(n)], label=f"dilation({a})")
        return FlatConformalMap(kind, {"a": a}, signature, d)
    if kind in ("linear-orthogonal", "rotation"):
        if kind == "rotation":
            i, j = params.get("plane", (0, 1))
            th = float(params.get("angle", 0.0))
            A = np.eye(n)
            if e[i, i] == e[j, j]:
                c, s = np.cos(th), np.sin(th)
                A[i, i], A[i, j], A[j, i], A[j, j] = c, -s, s, c
            else:
                c, s = np.cosh(th), np.sinh(th)
                A[i, i], A[i, j], A[j, i], A[j, j] = c, s, s, c
        else:
            A = np.asarray(params["A"], float)
        if A.shape != (n, n):
            raise FlatModelError(f"matrix has shape {A.shape}, expected {(n, n)}")
        if not np.allclose(A.T @ e @ A, e, atol=1e-12, rtol=0):
            raise FlatModelError("matrix does not preserve the flat form")
        Ai = np.linalg.inv(A)
        d = Diffeo(_linear(A), _linear(Ai), label=kind)
        return FlatConformalMap(kind, {"A": A}, signature, d)
    if kind == "special-conformal":
        b = np.asarray(params.get("b", np.zeros(n)), float)
        _check_len(b, n, "b")
        d = Diffeo(_special_conformal(e, b), _special_conformal(e, -b), label="special-conformal")
        return FlatConformalMap(kind, {"b": b}, signature, d,
                                singular="1 - 2<b,x> + <b,b><x,x> = 0")
    raise FlatModelError(f"unknown conformal map kind {kind!r}; choose from {MAP_KINDS}")


def _linear(A):
    n = A.shape[0]

    def fn(X):
        return [sum((X[j] * A[i, j] for j in range(n) if A[i, j] != 0.0), X[0] * 0.0)
                for i in range(n)]

    return fn


def _check_len(v, n, name):
    if v.shape != (n,):
        raise FlatModelError(f"parameter {name} must have length {n}")


def compose_maps(*maps: FlatConformalMap) -> FlatConformalMap:
    """``maps[0] o maps[1] o ...`` as a composite catalog entry."""
    if not maps:
        raise FlatModelError("nothing to compose")
    d = maps[0].diffeo
    for m in maps[1:]:
        d = d.compose(m.diffeo)
    return FlatConformalMap("composite", {"parts": [m.kind for m in maps]}, maps[0].signature,
                            d, singular="; ".join(m.singular for m in maps if m.singular))


@dataclass
class ConformalGenerator:
    kind: str
    params: dict
    signature: tuple[int, int]
    field: VectorField


def conformal_generator(kind: str, params: dict | None = None,
                        signature: tuple[int, int] = (2, 0)) -> ConformalGenerator:
    """Element of the conformal Lie algebra as a polynomial vector field."""
    params = dict(params or {})
    p, q = signature
    e = eta(p, q)
    n = p + q
    if kind == "translation":
        i = int(params.get("i", 0))
        fn = lambda X: [X[0] * 0.0 + (1.0 if k == i else 0.0) for k in range(n)]  # noqa: E731
    elif kind == "rotation":
        i, j = params.get("plane", (0, 1))
        if i == j:
            raise FlatModelError("rotation plane needs two distinct axes")

        def fn(X):
            out = [X[0] * 0.0 for _ in range(n)]
            # (eta x)_i d_j - (eta x)_j d_i
            out[j] = out[j] + X[i] * e[i, i]
            out[i] = out[i] - X[j] * e[j, j]
            return out
    elif kind == "dilation":
        fn = lambda X: [X[k] for k in range(n)]  # noqa: E731
    elif kind == "special-conformal":
        b = np.asarray(params.get("b", np.eye(n)[0]), float)
        _check_len(b, n, "b")

        def fn(X):
            xx = _form(e, X, X)
            bx = _form(e, b, X)
            return [X[k] * bx * 2.0 - xx * b[k] for k in range(n)]
    else:
        raise FlatModelError(f"unknown generator kind {kind!r}; choose from {GENERATOR_KINDS}")
    return ConformalGenerator(kind, params, signature, VectorField.from_function(fn, kind))


def all_generators(signature: tuple[int, int]) -> list[ConformalGenerator]:
    """A basis of the conformal algebra: ``(n+1)(n+2)/2`` generators."""
    n = sum(signature)
    out = [conformal_generator("translation", {"i": i}, signature) for i in range(n)]
    out += [conformal_generator("rotation", {"plane": (i, j)}, signature)
            for i in range(n) for j in range(i + 1, n)]
    out.append(conformal_generator("dilation", {}, signature))
    out += [conformal_generator("special-conformal", {"b": np.eye(n)[i]}, signature)
            for i in range(n)]
    return out


@dataclass
class ConformalityResult:
    conformal: bool
    factors: list[float] = field(default_factory=list)
    worst_residual: float = 0.0

    def __bool__(self) -> bool:
        return self.conformal


def is_conformal(f: Diffeo, g: Metric, probes, tol: float = 1e-9) -> ConformalityResult:
    """Test ``f^*g = F g`` with ``F > 0`` at every probe.

    The residual is ``|f^*g - F g| / |g|`` with ``F`` fitted by least squares.
    """
    pg = pull(f, g.field)
    factors, worst, ok = [], 0.0, True
    for x in probes:
        a = np.asarray(pg.jet(x, 0).value)
        b = g(x)
        F = float(np.sum(a * b) / np.sum(b * b))
        res = float(np.max(np.abs(a - F * b)) / np.max(np.abs(b)))
        worst = max(worst, res)
        factors.append(F)
        if res > tol or F <= 0:
            ok = False
    return ConformalityResult(ok, factors, worst)


def projective_map(M) -> Diffeo:
    """Linear-fractional action of an ``(n+1) x (n+1)`` matrix on the affine chart."""
    M = np.asarray(M, float)
    m = M.shape[0]
    if M.shape != (m, m) or m < 2:
        raise FlatModelError("projective map needs a square matrix of size n+1 >= 2")
    if abs(np.linalg.det(M)) < 1e-12:
        raise FlatModelError("matrix is singular")
    Mi = np.linalg.inv(M)
    n = m - 1

    def act(A):
        def fn(X):
            den = X[0] * A[n, 0]
            for j in range(1, n):
                den = den + X[j] * A[n, j]
            den = den + A[n, n]
            if abs(float(den.value)) < SINGULAR_TOL:
                raise FlatModelError("probe is on the hyperplane at infinity of the chart")
            out = []
            for i in range(n):
                num = X[0] * A[i, 0]
                for j in range(1, n):
                    num = num + X[j] * A[i, j]
                out.append((num + A[i, n]) / den)
            return out
        return fn

    return Diffeo(act(M), act(Mi), label="projective")
