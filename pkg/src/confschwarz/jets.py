"""Truncated multivariate Taylor series (jets).

A :class:`Jet` holds the Taylor coefficients ``d^alpha u(x0) / alpha!`` of a
field ``u`` at a base point ``x0`` for every multi-index with ``|alpha| <= K``.
Leading array axes are tensor indices, so a metric is a single jet of shape
``(n, n)``; the last axis of :attr:`Jet.coeffs` runs over multi-indices in
graded order.  Arithmetic between jets of different order truncates to the
smaller one, which is exact for the truncated result.  Asking for a
derivative beyond the available order raises :class:`OrderBudgetError`.
"""

from __future__ import annotations

import contextlib
import contextvars
import itertools
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Real
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = [
    "JetError",
    "JetEvaluationError",
    "CompositionError",
    "InversionError",
    "OrderBudgetError",
    "JetSpace",
    "Jet",
    "DEFAULT_ORDER",
    "order_budget",
    "current_budget",
    "check_budget",
    "coordinates",
    "constant",
    "jet_lift",
    "jet_compose",
    "jet_invert_map",
    "jet_derivative",
    "jacobian",
    "stack",
    "einsum",
    "matinv",
    "det",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "power",
]

DEFAULT_ORDER = 6
COMPOSE_TOL = 1e-12


class JetError(ArithmeticError):
    """Base class for jet arithmetic failures."""


class JetEvaluationError(JetError):
    """A non-finite coefficient appeared while expanding a field."""

    def __init__(self, message: str, multi_index: tuple[int, ...] | None = None):
        super().__init__(message)
        self.multi_index = multi_index


class CompositionError(JetError):
    """Outer base point does not match the value of the inner map."""


class InversionError(JetError):
    """The linear part of a map is singular or too badly conditioned."""


class OrderBudgetError(JetError):
    """A computation needs more Taylor orders than are available."""

    def __init__(self, message: str, needed: int | None = None):
        super().__init__(message)
        self.needed = needed


_BUDGET: contextvars.ContextVar[int] = contextvars.ContextVar(
    "jet_order_budget", default=DEFAULT_ORDER
)


@contextlib.contextmanager
def order_budget(order: int) -> Iterator[int]:
    """Limit the jet order that leaf fields may be expanded to."""
    token = _BUDGET.set(int(order))
    try:
        yield int(order)
    finally:
        _BUDGET.reset(token)


def current_budget() -> int:
    return _BUDGET.get()


def check_budget(order: int) -> None:
    budget = _BUDGET.get()
    if order > budget:
        raise OrderBudgetError(
            f"expansion to order {order} requested but the order budget is {budget}",
            needed=order,
        )


class JetSpace:
    """Index tables for jets in ``n`` variables truncated at ``order``.

    Use :func:`JetSpace.get`; instances are cached and shared.
    """

    def __init__(self, n: int, order: int):
        if n < 1 or order < 0:
            raise ValueError(f"invalid jet space n={n}, order={order}")
        self.n = n
        self.order = order
        indices: list[tuple[int, ...]] = []
        offsets = []
        for d in range(order + 1):
            offsets.append(len(indices))
            indices.extend(_multi_indices(n, d))
        offsets.append(len(indices))
        self.indices = indices
        self.size = len(indices)
        self.degree_offsets = offsets
        self.position = {a: k for k, a in enumerate(indices)}
        self.degrees = np.array([sum(a) for a in indices])
        self.factorials = np.array(
            [math.prod(math.factorial(e) for e in a) for a in indices], dtype=float
        )

        ia, ib, ic = [], [], []
        for p, a in enumerate(indices):
            da = sum(a)
            for q in range(offsets[order - da + 1]):
                b = indices[q]
                ia.append(p)
                ib.append(q)
                ic.append(self.position[tuple(x + y for x, y in zip(a, b))])
        perm = np.argsort(ic, kind="stable")
        self._ia = np.asarray(ia)[perm]
        self._ib = np.asarray(ib)[perm]
        ic_sorted = np.asarray(ic)[perm]
        self._starts = np.searchsorted(ic_sorted, np.arange(self.size))

        # partial derivative tables, result lives in order - 1
        self._dsrc = []
        self._dfac = []
        if order > 0:
            for i in range(n):
                src, fac = [], []
                for b in indices[: offsets[order]]:
                    up = list(b)
                    up[i] += 1
                    src.append(self.position[tuple(up)])
                    fac.append(b[i] + 1)
                self._dsrc.append(np.asarray(src))
                self._dfac.append(np.asarray(fac, dtype=float))

        # for monomials: alpha = parent(alpha) + e_var(alpha)
        parent = [0]
        var = [0]
        for a in indices[1:]:
            i = next(k for k, e in enumerate(a) if e)
            b = list(a)
            b[i] -= 1
            parent.append(self.position[tuple(b)])
            var.append(i)
        self._parent = np.asarray(parent)
        self._var = np.asarray(var)

    @staticmethod
    @lru_cache(maxsize=None)
    def get(n: int, order: int) -> "JetSpace":
        return JetSpace(n, order)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = a[..., self._ia] * b[..., self._ib]
        return np.add.reduceat(prod, self._starts, axis=-1)

    def __repr__(self) -> str:
        return f"JetSpace(n={self.n}, order={self.order})"


def _multi_indices(n: int, d: int) -> list[tuple[int, ...]]:
    out = []
    for combo in itertools.combinations_with_replacement(range(n), d):
        a = [0] * n
        for i in combo:
            a[i] += 1
        out.append(tuple(a))
    # lexicographically descending inside a degree block
    return sorted(set(out), reverse=True)


Scalar = (Real, Fraction, np.floating, np.integer)


class Jet:
    """Tensor of truncated Taylor expansions sharing a base point.

    Attributes:
        space: the :class:`JetSpace` (number of variables and order).
        coeffs: array of shape ``shape + (space.size,)``.
        base: base point, length ``space.n``.
    """

    __slots__ = ("space", "coeffs", "base", "_mono")
    __array_priority__ = 1000

    def __init__(self, space: JetSpace, coeffs, base):
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.base = np.asarray(base, dtype=float)
        self._mono = None
        if self.coeffs.shape[-1:] != (space.size,):
            raise ValueError(
                f"coefficient array of shape {self.coeffs.shape} does not fit {space}"
            )

    # -- basic properties -------------------------------------------------
    @property
    def order(self) -> int:
        return self.space.order

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self) -> np.ndarray | float:
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v

    def __len__(self) -> int:
        return self.shape[0]

    def __iter__(self):
        for k in range(self.shape[0]):
            yield self[k]

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.space, self.coeffs[idx + (slice(None),)], self.base)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, n={self.n}, order={self.order}, value={self.value!r})"

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderBudgetError(
                f"cannot raise jet order {self.order} to {order}", needed=order
            )
        if order == self.order:
            return self
        space = JetSpace.get(self.n, order)
        return Jet(space, self.coeffs[..., : space.size], self.base)

    def with_coeffs(self, coeffs) -> "Jet":
        return Jet(self.space, coeffs, self.base)

    def transpose(self, *axes) -> "Jet":
        if not axes:
            axes = tuple(reversed(range(len(self.shape))))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return self.with_coeffs(np.transpose(self.coeffs, tuple(axes) + (len(self.shape),)))

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return self.with_coeffs(self.coeffs.reshape(tuple(shape) + (self.space.size,)))

    def sum(self, axis=None) -> "Jet":
        nd = len(self.shape)
        if axis is None:
            axis = tuple(range(nd))
        return self.with_coeffs(self.coeffs.sum(axis=axis))

    # -- arithmetic -------------------------------------------------------
    def _align(self, other) -> tuple["Jet", "Jet"]:
        if isinstance(other, Jet):
            if other.n != self.n:
                raise JetError("jets live in different numbers of variables")
            if other.base is not self.base and not np.allclose(
                other.base, self.base, rtol=0, atol=COMPOSE_TOL
            ):
                raise JetError("jets are expanded at different base points")
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, constant(other, self)

    def __add__(self, other) -> "Jet":
        if isinstance(other, Scalar):
            c = self.coeffs.copy()
            c[..., 0] += float(other)
            return self.with_coeffs(c)
        a, b = self._align(other)
        return a.with_coeffs(a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return self.with_coeffs(-self.coeffs)

    def __pos__(self) -> "Jet":
        return self

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Scalar):
            return self.with_coeffs(self.coeffs * float(other))
        if isinstance(other, np.ndarray) and other.size and not isinstance(other, Jet):
            return self.with_coeffs(self.coeffs * np.asarray(other, float)[..., None])
        a, b = self._align(other)
        return a.with_coeffs(a.space.mul(a.coeffs, b.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Scalar):
            return self.with_coeffs(self.coeffs / float(other))
        if isinstance(other, np.ndarray):
            return self.with_coeffs(self.coeffs / np.asarray(other, float)[..., None])
        a, b = self._align(other)
        out = a * _reciprocal(b)
        c = out.coeffs.copy()
        # constant term exactly as the float quotient
        with np.errstate(divide="ignore", invalid="ignore"):
            c[..., 0] = a.coeffs[..., 0] / b.coeffs[..., 0]
        return out.with_coeffs(c)

    def __rtruediv__(self, other) -> "Jet":
        return constant(other, self) / self

    def __pow__(self, p) -> "Jet":
        return power(self, p)

    # -- calculus ---------------------------------------------------------
    def partial(self, i: int) -> "Jet":
        """Partial derivative in variable ``i`` (one order is consumed)."""
        if self.order == 0:
            raise OrderBudgetError("cannot differentiate an order-0 jet", needed=1)
        low = JetSpace.get(self.n, self.order - 1)
        src = self.space._dsrc[i]
        fac = self.space._dfac[i]
        return Jet(low, self.coeffs[..., src] * fac, self.base)

    def gradient(self) -> "Jet":
        """All partials, derivative index prepended: ``out[i, ...] = d_i self``."""
        return stack([self.partial(i) for i in range(self.n)])

    def derivative(self, alpha: Sequence[int]):
        return jet_derivative(self, alpha)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))


def constant(value, like: Jet) -> Jet:
    """Constant jet (array of constants allowed) in the space of ``like``."""
    v = np.asarray(value, dtype=float)
    c = np.zeros(v.shape + (like.space.size,))
    c[..., 0] = v
    return Jet(like.space, c, like.base)


def coordinates(x, order: int) -> Jet:
    """Jet of the coordinate functions ``x^i`` at ``x`` (shape ``(n,)``)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    space = JetSpace.get(n, order)
    c = np.zeros((n, space.size))
    c[:, 0] = x
    if order > 0:
        for i in range(n):
            e = [0] * n
            e[i] = 1
            c[i, space.position[tuple(e)]] = 1.0
    return Jet(space, c, x)


identity_map = coordinates


def stack(jets: Sequence[Jet], axis: int = 0) -> Jet:
    """Stack jets (or constants) along a new leading axis."""
    ref = next((j for j in jets if isinstance(j, Jet)), None)
    if ref is None:
        raise TypeError("stack needs at least one Jet")
    k = min(j.order for j in jets if isinstance(j, Jet))
    ref = ref.truncate(k)
    parts = [j.truncate(k) if isinstance(j, Jet) else constant(j, ref) for j in jets]
    if axis < 0:
        axis += len(parts[0].shape) + 1
    return Jet(ref.space, np.stack([p.coeffs for p in parts], axis=axis), ref.base)


def einsum(subscripts: str, a: Jet, b) -> Jet:
    """Two-operand einsum in the tensor axes; multiplication is jet product.

    ``b`` may be a constant ndarray, in which case the contraction is linear.
    """
    if "z" in subscripts:
        raise ValueError("subscript letter 'z' is reserved")
    ins, out = subscripts.split("->")
    sa, sb = ins.split(",")
    if not isinstance(b, Jet):
        return a.with_coeffs(np.einsum(f"{sa}z,{sb}->{out}z", a.coeffs, np.asarray(b, float)))
    a, b = a._align(b)
    sp = a.space
    prod = np.einsum(
        f"{sa}z,{sb}z->{out}z", a.coeffs[..., sp._ia], b.coeffs[..., sp._ib]
    )
    return Jet(sp, np.add.reduceat(prod, sp._starts, axis=-1), a.base)


# -- univariate functions ------------------------------------------------------

def _univariate(j: Jet, derivs: np.ndarray, name: str) -> Jet:
    """Apply f given ``derivs[k] = f^(k)(j.value)`` (shape ``(K+1,) + j.shape``)."""
    if not np.all(np.isfinite(derivs)):
        bad = np.argwhere(~np.isfinite(derivs))[0]
        raise JetEvaluationError(
            f"{name} is not finite at {j.value!r}", multi_index=(int(bad[0]),)
        )
    K = j.order
    out = np.zeros(j.coeffs.shape)
    out[..., 0] = derivs[0]
    if K == 0:
        return j.with_coeffs(out)
    h = j.coeffs.copy()
    h[..., 0] = 0.0
    term = h
    for k in range(1, K + 1):
        out += (derivs[k] / math.factorial(k))[..., None] * term
        if k < K:
            term = j.space.mul(term, h)
    return j.with_coeffs(out)


def _values(j: Jet) -> np.ndarray:
    return np.asarray(j.coeffs[..., 0])


def exp(j):
    if not isinstance(j, Jet):
        return math.exp(j)
    e = np.exp(_values(j))
    return _univariate(j, np.broadcast_to(e, (j.order + 1,) + e.shape), "exp")


def log(j):
    if not isinstance(j, Jet):
        return math.log(j)
    a = _values(j)
    if np.any(a <= 0):
        raise JetEvaluationError(f"log of non-positive value {a!r}")
    d = [np.log(a)]
    for k in range(1, j.order + 1):
        d.append((-1) ** (k - 1) * math.factorial(k - 1) / a**k)
    return _univariate(j, np.array(d), "log")


def sin(j):
    if not isinstance(j, Jet):
        return math.sin(j)
    a = _values(j)
    cyc = [np.sin(a), np.cos(a), -np.sin(a), -np.cos(a)]
    return _univariate(j, np.array([cyc[k % 4] for k in range(j.order + 1)]), "sin")


def cos(j):
    if not isinstance(j, Jet):
        return math.cos(j)
    a = _values(j)
    cyc = [np.cos(a), -np.sin(a), -np.cos(a), np.sin(a)]
    return _univariate(j, np.array([cyc[k % 4] for k in range(j.order + 1)]), "cos")


def sinh(j):
    if not isinstance(j, Jet):
        return math.sinh(j)
    a = _values(j)
    cyc = [np.sinh(a), np.cosh(a)]
    return _univariate(j, np.array([cyc[k % 2] for k in range(j.order + 1)]), "sinh")


def cosh(j):
    if not isinstance(j, Jet):
        return math.cosh(j)
    a = _values(j)
    cyc = [np.cosh(a), np.sinh(a)]
    return _univariate(j, np.array([cyc[k % 2] for k in range(j.order + 1)]), "cosh")


def power(j, p):
    """``j ** p``; a non-integer exponent needs a positive base."""
    p = Fraction(p) if isinstance(p, (int, Fraction)) else p
    integral = isinstance(p, Fraction) and p.denominator == 1
    if not isinstance(j, Jet):
        if not integral and j <= 0:
            raise JetEvaluationError(f"non-integer power of non-positive value {j!r}")
        return float(j) ** (int(p) if integral else float(p))
    a = _values(j)
    if integral:
        q = int(p)
        if q >= 0 and q <= 4:
            out = constant(1.0, j)
            for _ in range(q):
                out = out * j
            return out
        if q < 0 and np.any(a == 0):
            raise JetEvaluationError("negative power of zero")
        d = []
        fall = 1.0
        for k in range(j.order + 1):
            d.append(fall * a ** (q - k) if q - k >= 0 else fall * (1.0 / a) ** (k - q))
            fall *= q - k
        return _univariate(j, np.array(d), "power")
    if np.any(a <= 0):
        raise JetEvaluationError(f"non-integer power of non-positive value {a!r}")
    pf = float(p)
    d = []
    fall = 1.0
    for k in range(j.order + 1):
        d.append(fall * a ** (pf - k))
        fall *= pf - k
    return _univariate(j, np.array(d), "power")


def sqrt(j):
    if not isinstance(j, Jet):
        if j <= 0:
            raise JetEvaluationError(f"sqrt of non-positive value {j!r}")
        return math.sqrt(j)
    a = _values(j)
    if np.any(a <= 0):
        raise JetEvaluationError(f"sqrt of non-positive value {a!r}")
    return power(j, Fraction(1, 2))


def _reciprocal(j: Jet) -> Jet:
    a = _values(j)
    if np.any(a == 0):
        raise JetEvaluationError("division by a jet with zero value")
    d = []
    fall = 1.0
    for k in range(j.order + 1):
        d.append(fall / a ** (k + 1))
        fall *= -(k + 1)
    return _univariate(j, np.array(d), "reciprocal")


# -- the four primitive operations ---------------------------------------------

def _as_tensor(obj, like: Jet):
    if isinstance(obj, (list, tuple)) and any(isinstance(o, (Jet, list, tuple)) for o in obj):
        return stack([_as_tensor(o, like) for o in obj])
    return obj if isinstance(obj, Jet) else constant(obj, like)


def jet_lift(field: Callable[[Jet], Jet], x, order: int) -> Jet:
    """Expand ``field`` (a function of coordinate jets) at ``x`` to ``order``.

    ``field`` may return a Jet, a number, or a nested list of those.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    check_budget(order)
    X = coordinates(x, order)
    out = _as_tensor(field(X), X[0])
    if not isinstance(out, Jet):
        out = constant(out, X[0])
    elif out.order < order:
        raise OrderBudgetError(f"field returned order {out.order} < {order}", needed=order)
    if not out.is_finite():
        bad = np.argwhere(~np.isfinite(out.coeffs))[0]
        alpha = out.space.indices[int(bad[-1])]
        raise JetEvaluationError(f"non-finite Taylor coefficient at {alpha}", alpha)
    return out


def _monomials(inner: Jet, order: int) -> np.ndarray:
    """Rows ``(inner - value)^alpha`` for alpha in the outer space."""
    cache = inner._mono
    if cache is not None and cache[0] >= order:
        return cache[1][: JetSpace.get(inner.shape[0], order).size]
    m = inner.shape[0]
    outer = JetSpace.get(m, order)
    sp = inner.space
    delta = inner.coeffs.copy()
    delta[:, 0] = 0.0
    mono = np.zeros((outer.size, sp.size))
    mono[0, 0] = 1.0
    offs = outer.degree_offsets
    for d in range(1, order + 1):
        rows = np.arange(offs[d], offs[d + 1])
        mono[rows] = sp.mul(mono[outer._parent[rows]], delta[outer._var[rows]])
    inner._mono = (order, mono)
    return mono


def jet_compose(outer: Jet, inner: Jet) -> Jet:
    """Taylor expansion of ``outer o inner`` at ``inner.base``.

    ``outer`` is expanded at the point ``inner.value``; ``inner`` is a map jet
    of shape ``(outer.n,)``.
    """
    if inner.shape != (outer.n,):
        raise CompositionError(
            f"inner map has shape {inner.shape}, outer expects {outer.n} arguments"
        )
    y0 = np.asarray(inner.coeffs[:, 0])
    scale = 1.0 + float(np.max(np.abs(y0)))
    if np.max(np.abs(y0 - outer.base)) > COMPOSE_TOL * scale:
        raise CompositionError(
            f"outer expanded at {outer.base}, inner maps to {y0}"
        )
    k = min(outer.order, inner.order)
    space = JetSpace.get(inner.n, k)
    mono = _monomials(inner, k)[:, : space.size]
    oc = outer.coeffs[..., : JetSpace.get(outer.n, k).size]
    return Jet(space, oc @ mono, inner.base)


def jacobian(m: Jet) -> Jet:
    """``J[i, j] = d_j m^i`` for a map jet of shape ``(n,)``."""
    g = m.gradient()
    return g.transpose(tuple(range(1, len(g.shape))) + (0,))


def jet_invert_map(m: Jet, order: int | None = None) -> Jet:
    """Jet of the local inverse of the map ``m`` at ``m.value``."""
    n = m.n
    if m.shape != (n,):
        raise InversionError("only square maps can be inverted")
    K = m.order if order is None else order
    if K > m.order:
        raise OrderBudgetError(f"inverse to order {K} needs a forward jet of order {K}", needed=K)
    m = m.truncate(K)
    x0 = m.base
    y0 = np.asarray(m.coeffs[:, 0])
    space = m.space
    if K == 0:
        return Jet(space, np.concatenate([x0[:, None]], axis=1), y0)
    lin = np.zeros((n, n))
    for j in range(n):
        e = [0] * n
        e[j] = 1
        lin[:, j] = m.coeffs[:, space.position[tuple(e)]]
    cond = np.linalg.cond(lin)
    if not np.isfinite(cond) or cond >= 1e8:
        raise InversionError(f"Jacobian is singular or ill-conditioned (cond={cond:.3g})")
    ainv = np.linalg.inv(lin)
    nonlin = m.coeffs.copy()
    nonlin[:, : space.degree_offsets[2]] = 0.0
    N = Jet(space, nonlin, x0)
    V = coordinates(y0, K) - y0
    U = x0 + einsum("j,ij->i", V, ainv)
    for _ in range(K - 1):
        U = x0 + einsum("j,ij->i", V - jet_compose(N, U), ainv)
    return U


def jet_derivative(j: Jet, alpha: Sequence[int]):
    """``d^alpha`` of the field at the base point (``alpha! * coeff``)."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != j.n:
        raise ValueError(f"multi-index {alpha} has wrong length for n={j.n}")
    if sum(alpha) > j.order:
        raise OrderBudgetError(
            f"derivative of order {sum(alpha)} requested from a jet of order {j.order}",
            needed=sum(alpha),
        )
    k = j.space.position[alpha]
    v = j.coeffs[..., k] * j.space.factorials[k]
    return float(v) if np.ndim(v) == 0 else v


# -- matrices of jets ----------------------------------------------------------

def matinv(a: Jet) -> Jet:
    """Inverse of a square matrix of jets by Newton iteration."""
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValueError("matinv needs a square matrix jet")
    a0 = np.asarray(a.coeffs[..., 0])
    if abs(np.linalg.det(a0)) < 1e-300:
        raise InversionError("singular matrix")
    X = constant(np.linalg.inv(a0), a)
    eye = np.eye(m)
    reach = 0
    while reach < a.order:
        X = einsum("ij,jk->ik", X, 2 * eye - einsum("ij,jk->ik", a, X))
        reach = 2 * reach + 1
    return X


def det(a: Jet) -> Jet:
    """Determinant of a square matrix of jets (Leibniz expansion)."""
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValueError("det needs a square matrix jet")
    total = None
    for perm in itertools.permutations(range(m)):
        sign = _perm_sign(perm)
        term = a[0, perm[0]]
        for i in range(1, m):
            term = term * a[i, perm[i]]
        term = term if sign > 0 else -term
        total = term if total is None else total + term
    return total


def _perm_sign(perm) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign
