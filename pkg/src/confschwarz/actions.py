"""Diffeomorphisms and vector fields acting on tensor densities, symbols,
differential operators and connections.

Direction conventions used throughout the package:

* ``pull(f, T)`` is the genuine pullback ``f^*T``; a density of weight ``w``
  picks up ``J_f^w`` and is evaluated at ``f(x)``.
* ``push(f, T) = pull(f^{-1}, T)``; on densities this is
  ``phi o f^{-1} * J_{f^{-1}}^w`` and on symbols the natural action
  ``f*P * J_{f^{-1}}^delta``.
* ``act_operator(f, A) = push(f) o A o pull(f)``.  Its inverse action
  ``act_operator(f^{-1}, A) = pull(f) o A o push(f)`` is the conjugation that
  appears in the Schwarzian-type cocycles.
* ``ell(f) = f^*Gamma - Gamma`` with the pulled-back connection
  ``(f^*Gamma)^k_ij = (Df^{-1})^k_a (d_i d_j f^a + Gamma^a_bc(f) d_i f^b d_j f^c)``;
  with these choices ``ell(f o h) = h^* ell(f) + ell(h)``.
* Lie derivatives are ``d/dt|0`` of the pullback by the flow.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from . import jets
from .fields import Field, as_jet_tensor
from .geometry import Metric, covariant_derivative
from .jets import Jet

__all__ = [
    "ActionError",
    "OrientationError",
    "FlowError",
    "Diffeo",
    "VectorField",
    "pull",
    "push",
    "pullback_density",
    "act_symbol",
    "act_operator",
    "pull_operator",
    "ell_field",
    "connection_field",
    "pulled_connection",
    "ell",
    "TensorL",
    "trace_ell",
    "traceless_ell",
    "lie_connection",
    "lie_connection_field",
    "lie_derivative",
    "lie_operator",
    "flow_map",
    "flow_diffeo",
    "pullback",
]

NEWTON_TOL = 1e-14
ROUNDTRIP_TOL = 1e-9


class ActionError(ValueError):
    """Base error for group and algebra actions."""


class OrientationError(ActionError):
    """Fractional power of a negative Jacobian."""


class FlowError(ActionError):
    """The flow integrator failed (step-size underflow or blow-up)."""


# -- diffeomorphisms -----------------------------------------------------------

class Diffeo:
    """Local diffeomorphism with jets of the map and of its inverse.

    Args:
        forward: function of the coordinate jet vector returning the image
            components (a list of jets), or ``None`` when ``forward_jet`` is given.
        inverse: same for the inverse map; synthesized by Newton iteration and
            jet inversion when omitted.
        label: free text for reports.
        forward_jet / inverse_jet: ``fn(x, order) -> Jet`` alternatives to the
            analytic forms (used for numerically integrated flows).
    """

    def __init__(self, forward=None, inverse=None, label: str = "", *,
                 forward_jet: Callable[[np.ndarray, int], Jet] | None = None,
                 inverse_jet: Callable[[np.ndarray, int], Jet] | None = None):
        if forward is None and forward_jet is None:
            raise ActionError("a diffeomorphism needs a forward map")
        self.label = label
        self._forward = forward
        self._inverse = inverse
        self._fwd = forward_jet or self._lift(forward)
        self._inv = inverse_jet or (self._lift(inverse) if inverse is not None else None)
        self._fcache: dict[bytes, Jet] = {}
        self._icache: dict[bytes, Jet] = {}
        self._inverse_obj: Diffeo | None = None

    @staticmethod
    def _lift(func):
        def fn(x, k):
            return jets.jet_lift(lambda X: as_jet_tensor(func(X), X), x, k)

        return fn

    @classmethod
    def identity(cls, n: int) -> "Diffeo":
        return cls(lambda X: [X[i] for i in range(n)], lambda X: [X[i] for i in range(n)],
                   label="identity")

    @staticmethod
    def _cached(cache, fn, x, order):
        key = x.tobytes()
        hit = cache.get(key)
        if hit is not None and hit.order >= order:
            return hit.truncate(order)
        out = fn(x, order)
        if len(cache) > 4096:
            cache.clear()
        cache[key] = out
        return out

    def jet(self, x, order: int) -> Jet:
        """Jet of the map at ``x``."""
        x = np.atleast_1d(np.asarray(x, float))
        return self._cached(self._fcache, self._fwd, x, order)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.jet(x, 0).value, dtype=float)

    def preimage(self, y) -> np.ndarray:
        """``f^{-1}(y)`` by the given inverse or by Newton iteration."""
        y = np.atleast_1d(np.asarray(y, float))
        if self._inv is not None:
            return np.asarray(self._inv(y, 0).value, dtype=float)
        x = y.copy()
        for _ in range(60):
            m = self.jet(x, 1)
            r = np.asarray(m.value) - y
            if np.max(np.abs(r)) < NEWTON_TOL * (1 + np.max(np.abs(y))):
                return x
            D = np.asarray(jets.jacobian(m).value)
            x = x - np.linalg.solve(D, r)
        raise jets.InversionError(f"Newton iteration for the preimage of {y} did not converge")

    def inverse_jet(self, y, order: int) -> Jet:
        """Jet of ``f^{-1}`` at ``y``."""
        y = np.atleast_1d(np.asarray(y, float))
        if self._inv is not None:
            return self._cached(self._icache, self._inv, y, order)

        def synth(y, k):
            x = self.preimage(y)
            inv = jets.jet_invert_map(self.jet(x, k))
            # re-anchor the expansion exactly at y
            return jets.Jet(inv.space, inv.coeffs, y)

        return self._cached(self._icache, synth, y, order)

    def inverse(self) -> "Diffeo":
        if self._inverse_obj is None:
            inv = Diffeo(label=f"inv({self.label})", forward_jet=self.inverse_jet,
                         inverse_jet=self.jet)
            inv._inverse_obj = self
            self._inverse_obj = inv
        return self._inverse_obj

    def compose(self, h: "Diffeo") -> "Diffeo":
        """``self o h``."""
        f = self

        def fwd(x, k):
            hj = h.jet(x, k)
            return jets.jet_compose(f.jet(np.asarray(hj.value, float), k), hj)

        def inv(y, k):
            fi = f.inverse_jet(y, k)
            return jets.jet_compose(h.inverse_jet(np.asarray(fi.value, float), k), fi)

        return Diffeo(label=f"{f.label}o{h.label}", forward_jet=fwd, inverse_jet=inv)

    __matmul__ = compose

    def jacobian_det(self, x) -> float:
        return float(np.linalg.det(np.asarray(jets.jacobian(self.jet(x, 1)).value)))

    def check(self, x, order: int = 3, tol: float = ROUNDTRIP_TOL) -> float:
        """Round-trip error of ``f^{-1} o f`` jets at ``x``; raises above ``tol``."""
        x = np.atleast_1d(np.asarray(x, float))
        if abs(self.jacobian_det(x)) < 1e-12:
            raise jets.InversionError(f"Jacobian of {self.label} vanishes at {x}")
        fx = self.jet(x, order)
        rt = jets.jet_compose(self.inverse_jet(np.asarray(fx.value, float), order), fx)
        err = float(np.max(np.abs(rt.coeffs - jets.coordinates(x, order).coeffs)))
        if err > tol:
            raise jets.InversionError(f"round trip error {err:.3g} for {self.label} at {x}")
        return err

    def __repr__(self) -> str:
        return f"Diffeo({self.label!r})"


class VectorField(Field):
    """Contravariant vector field ``X^i d_i``."""

    def __init__(self, fn, label: str = ""):
        super().__init__(fn, "u", 0, label)

    @classmethod
    def from_function(cls, func, label: str = "", **_) -> "VectorField":
        return cls(lambda x, k: jets.jet_lift(lambda X: as_jet_tensor(func(X), X), x, k), label)

    @classmethod
    def zero(cls, n: int) -> "VectorField":
        return cls.from_function(lambda X: [X[0] * 0.0 for _ in range(n)], "0")

    def scaled(self, c: float) -> "VectorField":
        return VectorField(lambda x, k: self.jet(x, k) * c, f"{c}*{self.label}")


# -- tensor transport ----------------------------------------------------------

def _density_factor(J: Jet, w) -> Jet | None:
    if w == 0:
        return None
    j0 = float(J.value)
    integral = isinstance(w, Fraction) and w.denominator == 1 or (
        not isinstance(w, Fraction) and float(w).is_integer())
    if j0 <= 0 and not integral:
        raise OrientationError(
            f"Jacobian {j0:.6g} is not positive; weight {w} would need a fractional power"
        )
    if j0 < 0:
        return jets.power(-J, float(w)) * (-1.0 if int(w) % 2 else 1.0)
    return jets.power(J, float(w))


def _transform(T: Jet, kinds: str, D: Jet, Dinv: Jet) -> Jet:
    """Apply ``Df^{-1}`` on upper and ``Df^T`` on lower axes ("pullback" rule)."""
    letters = "abcdefghijklmnopqrstuvwxy"
    r = len(kinds)
    for axis, kind in enumerate(kinds):
        idx = list(letters[:r])
        src = idx.copy()
        src[axis] = "y"
        if kind == "u":
            T = jets.einsum(f"{idx[axis]}y,{''.join(src)}->{''.join(idx)}", Dinv, T)
        else:
            T = jets.einsum(f"y{idx[axis]},{''.join(src)}->{''.join(idx)}", D, T)
    return T


def pull(f: Diffeo, T: Field) -> Field:
    """Genuine pullback ``f^*T`` of a tensor density field."""
    kinds = T.kinds or ""
    w = T.weight

    def fn(x, k):
        fx = f.jet(x, k + 1)
        y = np.asarray(fx.value, float)
        Tc = jets.jet_compose(T.jet(y, k), fx.truncate(k))
        if kinds or w:
            D = jets.jacobian(fx)
            if "u" in kinds:
                Tc = _transform(Tc, kinds, D, jets.matinv(D))
            elif kinds:
                Tc = _transform(Tc, kinds, D, D)
            fac = _density_factor(jets.det(D), w)
            if fac is not None:
                Tc = Tc * fac
        return Tc

    return Field(fn, T.kinds, w, f"pull({f.label},{T.label})")


pullback = pull


def push(f: Diffeo, T: Field) -> Field:
    """Natural (push-forward) action ``f_w(T) = pull(f^{-1}, T)``."""
    return pull(f.inverse(), T).with_meta(label=f"push({f.label},{T.label})")


def pullback_density(f: Diffeo, phi: Field, x, K: int) -> Jet:
    """Jet at ``x`` of ``phi o f^{-1} * J_{f^{-1}}^lambda``."""
    return push(f, phi.with_meta(kinds="")).jet(x, K)


def act_symbol(f: Diffeo, P: Field, x, K: int) -> Jet:
    """Jet at ``x`` of the natural action ``f*P * J_{f^{-1}}^delta``."""
    return push(f, P).jet(x, K)


Operator = Callable[[Field], Field]


def act_operator(f: Diffeo, A: Operator) -> Operator:
    """``f_{lambda,mu}(A) = push(f) o A o pull(f)``."""

    def B(P: Field) -> Field:
        return push(f, A(pull(f, P)))

    return B


def pull_operator(f: Diffeo, A: Operator) -> Operator:
    """Inverse conjugation ``pull(f) o A o push(f)``."""

    def B(P: Field) -> Field:
        return pull(f, A(push(f, P)))

    return B


# -- the tensor ell(f) ---------------------------------------------------------

def connection_field(g) -> Field:
    """Christoffel jets of a :class:`Metric`, or a connection field passed through."""
    if isinstance(g, Metric):
        return Field(lambda x, k: g.connection(x, k).gamma, "udd", 0, f"Gamma({g.label})")
    return g


def pulled_connection(f: Diffeo, g) -> Field:
    """``f^*Gamma`` as a ``(k, i, j)`` jet field (``g`` a metric or connection field)."""
    gamma = connection_field(g)

    def fn(x, k):
        fx = f.jet(x, k + 2)
        y = np.asarray(fx.value, float)
        D = jets.jacobian(fx)                       # order k+1, D[a, i] = d_i f^a
        H = D.gradient()                            # H[j, a, i] = d_j d_i f^a
        Gy = gamma.jet(y, k)
        Gc = jets.jet_compose(Gy, fx.truncate(k))
        Dk = D.truncate(k)
        quad = jets.einsum("abi,bj->aij", jets.einsum("abc,ci->abi", Gc, Dk), Dk)
        inner = H.transpose(1, 2, 0) + quad         # [a, i, j]
        return jets.einsum("ka,aij->kij", jets.matinv(Dk), inner)

    return Field(fn, "udd", 0, f"pullGamma({f.label})")


def ell_field(f: Diffeo, g) -> Field:
    """``ell(f) = f^*Gamma - Gamma`` as a ``(2,1)``-tensor field."""
    pg = pulled_connection(f, g)
    gamma = connection_field(g)

    def fn(x, k):
        return pg.jet(x, k) - gamma.jet(x, k)

    return Field(fn, "udd", 0, f"ell({f.label})")


class TensorL:
    """Values of ``ell(f)`` at a point, with the underlying jet."""

    def __init__(self, jet: Jet):
        self.jet = jet
        self.components = np.asarray(jet.value)
        self.trace = np.einsum("ttj->j", self.components)

    def __repr__(self) -> str:
        return f"TensorL(max={np.max(np.abs(self.components)):.3g})"


def ell(f: Diffeo, g: Metric, x, K: int = 0) -> TensorL:
    return TensorL(ell_field(f, g).jet(x, K))


def trace_ell(L: Jet) -> Jet:
    """``L_j = L^t_{tj}``."""
    return L.with_coeffs(np.einsum("ttjz->jz", L.coeffs))


def traceless_ell(L: Jet, n: int) -> Jet:
    """``L^k_ij - (1/n) Sym_{i,j} d^k_i L_j`` (two-term Sym)."""
    tr = trace_ell(L)
    eye = np.eye(n)
    s = jets.einsum("j,ki->kij", tr, eye)
    return L - (s + s.transpose(0, 2, 1)) * (1.0 / n)


# -- Lie derivatives -----------------------------------------------------------

def lie_connection_field(X: Field, g: Metric) -> Field:
    """``(L_X nabla)^k_ij`` as a jet field."""

    def fn(x, k):
        Xj = X.jet(x, k + 2)
        dX = Xj.gradient()                          # dX[m, k] = d_m X^k
        ddX = dX.gradient()                         # ddX[i, m, k] = d_i d_m X^k
        G = g.connection(x, k + 1).gamma
        dG = G.gradient()                           # dG[m, k, i, j]
        Xk = Xj.truncate(k)
        dXk = dX.truncate(k)
        Gk = G.truncate(k)
        out = ddX.transpose(2, 0, 1)
        out = out + jets.einsum("m,mkij->kij", Xk, dG)
        out = out - jets.einsum("mij,mk->kij", Gk, dXk)
        out = out + jets.einsum("kmj,im->kij", Gk, dXk)
        out = out + jets.einsum("kim,jm->kij", Gk, dXk)
        return out

    return Field(fn, "udd", 0, f"LieNabla({X.label})")


def lie_connection(X: Field, g: Metric, x) -> np.ndarray:
    return np.asarray(lie_connection_field(X, g).jet(x, 0).value)


def lie_derivative(X: Field, T: Field) -> Field:
    """``L_X T`` for a tensor density field (``d/dt`` of the flow pullback)."""
    kinds = T.kinds or ""
    w = float(T.weight)
    letters = "abcdefghijklnopqrstuvwxy"

    def fn(x, k):
        Tj = T.jet(x, k + 1)
        Xj = X.jet(x, k + 1)
        dX = Xj.gradient()                          # [m, a] = d_m X^a
        dT = Tj.gradient()
        r = len(kinds)
        idx = letters[:r]
        out = jets.einsum(f"m,m{idx}->{idx}", Xj.truncate(k), dT)
        Tk = Tj.truncate(k)
        for axis, kind in enumerate(kinds):
            src = list(idx)
            src[axis] = "m"
            src = "".join(src)
            if kind == "u":
                out = out - jets.einsum(f"m{idx[axis]},{src}->{idx}", dX, Tk)
            else:
                out = out + jets.einsum(f"{idx[axis]}m,{src}->{idx}", dX, Tk)
        if w:
            div = dX.with_coeffs(np.einsum("mmz->z", dX.coeffs))
            out = out + Tk * div * w
        return out

    return Field(fn, T.kinds, T.weight, f"Lie({X.label},{T.label})")


def lie_operator(X: Field, A: Operator) -> Operator:
    """``L_X(A)(P) = L_X(A P) - A(L_X P)``."""

    def B(P: Field) -> Field:
        return lie_derivative(X, A(P)) - A(lie_derivative(X, P))

    return B


# -- flows ---------------------------------------------------------------------

def flow_map(X: Field, t: float, x, K: int, rtol: float = 1e-13, atol: float = 1e-15) -> Jet:
    """Jet at ``x`` of the time-``t`` flow of ``X``.

    The coefficients of ``Y(t) = phi_t`` obey ``dY/dt = X o Y``; the system is
    integrated with an explicit Dormand-Prince 8(5,3) scheme.
    """
    x = np.atleast_1d(np.asarray(x, float))
    Y0 = jets.coordinates(x, K)
    if t == 0:
        return Y0
    space, shape = Y0.space, Y0.coeffs.shape

    def rhs(_, yflat):
        Y = Jet(space, yflat.reshape(shape), x)
        y = np.asarray(Y.value, float)
        Xy = X.jet(y, K)
        Xy = Jet(Xy.space, Xy.coeffs, y)
        return jets.jet_compose(Xy, Y).coeffs.ravel()

    sol = solve_ivp(rhs, (0.0, float(t)), Y0.coeffs.ravel(), method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise FlowError(f"flow integration failed: {sol.message}")
    return Jet(space, sol.y[:, -1].reshape(shape), x)


def flow_diffeo(X: Field, t: float) -> Diffeo:
    """The time-``t`` flow as a :class:`Diffeo` (inverse = flow of ``-t``)."""
    return Diffeo(label=f"flow({X.label},{t})",
                  forward_jet=lambda x, k: flow_map(X, t, x, k),
                  inverse_jet=lambda y, k: flow_map(X, -t, y, k))
