"""Pseudo-Riemannian metrics with their Levi-Civita connections, evaluated as
jets at a point, and covariant derivatives of tensor densities.

Index conventions: ``gamma[k, i, j]`` is the Christoffel symbol with upper
index ``k``; a covariant derivative prepends its index, so
``nabla(P)[k, i, j]`` is ``nabla_k P^{ij}``.  For a density of weight ``w``

    nabla_k T = d_k T + (upper-index terms) - (lower-index terms) - w Gamma_k T

with ``Gamma_k = Gamma^t_{tk}``.  The Riemann tensor is
``R^l_{ijk} = d_j Gamma^l_{ki} - d_k Gamma^l_{ji} + Gamma^l_{js} Gamma^s_{ki}
- Gamma^l_{ks} Gamma^s_{ji}`` and ``Ric_{ik} = R^l_{ilk}``, which makes the
unit round sphere positively curved.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import jets
from .fields import Field
from .jets import Jet

__all__ = [
    "MetricError",
    "Connection",
    "CurvatureData",
    "Metric",
    "covariant_derivative",
    "nabla",
    "christoffel",
    "curvature",
    "covderiv_density",
    "covderiv_symbol",
    "rescaled_connection_formula",
    "verify_rescaling_identities",
    "metric_compatibility",
    "einstein_divergence",
]

DET_TOL = 1e-12


class MetricError(ValueError):
    """Singular metric, wrong signature, or asymmetric components."""


@dataclass(frozen=True)
class Connection:
    """Levi-Civita connection jets at ``point``."""

    point: np.ndarray
    gamma: Jet      # (n, n, n), gamma[k, i, j] = Gamma^k_ij
    metric: Jet     # (n, n)
    inverse: Jet    # (n, n)

    @property
    def order(self) -> int:
        return self.gamma.order

    @property
    def trace(self) -> Jet:
        """``Gamma_i = Gamma^t_{ti}``."""
        return _trace_first(self.gamma)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.gamma.value)


def _trace_first(g: Jet) -> Jet:
    return g.with_coeffs(np.einsum("ttjz->jz", g.coeffs))


@dataclass(frozen=True)
class CurvatureData:
    point: np.ndarray
    riemann: Jet    # R^l_{ijk}
    ricci: Jet      # R_ij
    scalar: Jet     # R

    @property
    def ricci_array(self) -> np.ndarray:
        return np.asarray(self.ricci.value)

    @property
    def scalar_value(self) -> float:
        return float(self.scalar.value)


class Metric:
    """Metric tensor field ``g_ij`` with cached connection and curvature jets.

    Args:
        field: a :class:`Field` of kind ``"dd"`` returning symmetric ``(n, n)`` jets.
        signature: ``(p, q)``; checked against eigenvalue signs at every point.
        flat: promise that the components are constant (skips derivatives).
    """

    def __init__(self, field: Field, signature: tuple[int, int] | None = None,
                 label: str = "", flat: bool = False):
        self.field = field.with_meta(kinds="dd", weight=0)
        self.signature = tuple(signature) if signature is not None else None
        self.label = label or field.label
        self.flat = flat
        self._conn: dict[bytes, Connection] = {}
        self._curv: dict[bytes, CurvatureData] = {}
        self._checked: set[bytes] = set()

    @classmethod
    def from_function(cls, func, signature=None, label: str = "") -> "Metric":
        return cls(Field.from_function(func, "dd", 0, label), signature, label)

    @property
    def n(self) -> int | None:
        return sum(self.signature) if self.signature else None

    def jet(self, x, order: int) -> Jet:
        g = self.field.jet(x, order)
        self._validate(np.atleast_1d(np.asarray(x, float)), g)
        return g

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.jet(x, 0).value)

    def _validate(self, x: np.ndarray, g: Jet) -> None:
        key = x.tobytes()
        if key in self._checked:
            return
        g0 = np.asarray(g.value)
        if g0.shape != (x.size, x.size):
            raise MetricError(f"metric components have shape {g0.shape} at a point of dim {x.size}")
        if not np.allclose(g0, g0.T, rtol=0, atol=1e-12):
            raise MetricError("metric components are not symmetric")
        if abs(np.linalg.det(g0)) < DET_TOL:
            raise MetricError(f"metric is degenerate at {x} (|det g| < {DET_TOL})")
        if self.signature is not None:
            ev = np.linalg.eigvalsh(g0)
            p = int(np.sum(ev > 0))
            if (p, x.size - p) != self.signature:
                raise MetricError(
                    f"metric has signature {(p, x.size - p)} at {x}, expected {self.signature}"
                )
        self._checked.add(key)

    def inverse_jet(self, x, order: int) -> Jet:
        """Jet of ``g^{ij}``."""
        return self.connection(x, max(order - 1, 0)).inverse.truncate(order)

    def connection(self, x, order: int) -> Connection:
        """Christoffel jets to ``order`` (needs metric jets to ``order + 1``)."""
        x = np.atleast_1d(np.asarray(x, float))
        key = x.tobytes()
        hit = self._conn.get(key)
        if hit is not None and hit.order >= order:
            if hit.order == order:
                return hit
            return Connection(x, hit.gamma.truncate(order), hit.metric.truncate(order + 1),
                              hit.inverse.truncate(order + 1))
        g = self.jet(x, order + 1)
        ginv = jets.matinv(g)
        if self.flat:
            gamma = jets.constant(np.zeros((x.size,) * 3), g.truncate(order)[0, 0])
        else:
            dg = g.gradient()  # dg[l, i, j] = d_l g_ij
            # lowered: Gamma_{l i j} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
            t = dg.coeffs
            low = 0.5 * (np.einsum("ijlz->lijz", t) + np.einsum("jilz->lijz", t) - t)
            gamma = jets.einsum("kl,lij->kij", ginv, dg.with_coeffs(low))
        conn = Connection(x, gamma, g, ginv)
        self._conn[key] = conn
        return conn

    def curvature(self, x, order: int = 0) -> CurvatureData:
        """Curvature jets (metric jets to ``order + 2``)."""
        x = np.atleast_1d(np.asarray(x, float))
        key = x.tobytes()
        hit = self._curv.get(key)
        if hit is not None and hit.scalar.order >= order:
            if hit.scalar.order == order:
                return hit
            return CurvatureData(x, hit.riemann.truncate(order), hit.ricci.truncate(order),
                                 hit.scalar.truncate(order))
        conn = self.connection(x, order + 1)
        G = conn.gamma
        dG = G.gradient().coeffs  # dG[j, l, k, i] = d_j Gamma^l_{ki}
        lin = np.einsum("jlkiz->ljkiz", dG)
        lin = lin - np.einsum("ljkiz->lkjiz", lin)
        # quadratic: Gamma^l_{js} Gamma^s_{ki} - Gamma^l_{ks} Gamma^s_{ji}
        q = jets.einsum("ljs,ski->ljki", G, G)
        quad = q.coeffs - np.einsum("ljkiz->lkjiz", q.coeffs)
        quad = quad[..., : lin.shape[-1]]
        lo = jets.JetSpace.get(x.size, order)
        # R^l_{ijk} stored as riemann[l, i, j, k]
        Rm = Jet(lo, np.einsum("ljkiz->lijkz", lin + quad), G.base)
        ric = Rm.with_coeffs(np.einsum("lilkz->ikz", Rm.coeffs))
        scal = jets.einsum("ik,ik->", conn.inverse, ric)
        cd = CurvatureData(x, Rm.truncate(order), ric.truncate(order), scal.truncate(order))
        self._curv[key] = cd
        return cd

    def rescaled(self, F: Field, label: str = "") -> "Metric":
        """The metric ``F * g`` (``F`` a positive scalar field)."""
        g = self.field

        def fn(x, k):
            f = F.jet(x, k)
            if np.any(np.asarray(f.value) <= 0):
                raise MetricError(f"conformal factor is not positive at {x}")
            return g.jet(x, k) * f

        return Metric(Field(fn, "dd", 0), self.signature, label or f"F*{self.label}")

    def __repr__(self) -> str:
        return f"Metric({self.label!r}, signature={self.signature})"


# -- covariant derivatives -----------------------------------------------------

_LETTERS = [c for c in string.ascii_lowercase if c != "z"]


def covariant_derivative(T: Jet, kinds: str, weight, conn: Connection) -> Jet:
    """``nabla_k T`` with ``k`` prepended; one order of ``T`` is consumed."""
    r = len(kinds)
    if T.shape != (conn.gamma.shape[0],) * r:
        raise ValueError(f"tensor shape {T.shape} does not match kinds {kinds!r}")
    out = T.gradient()
    G = conn.gamma.truncate(out.order) if conn.order > out.order else conn.gamma
    if r:
        k, t = "k", "t"
        free = [c for c in _LETTERS if c not in "kt"][:r]
        for axis, kind in enumerate(kinds):
            src = free.copy()
            src[axis] = t
            if kind == "u":
                term = jets.einsum(f"{free[axis]}{k}{t},{''.join(src)}->{k}{''.join(free)}", G, T)
                out = out + term
            else:
                term = jets.einsum(f"{t}{k}{free[axis]},{''.join(src)}->{k}{''.join(free)}", G, T)
                out = out - term
    w = float(weight)
    if w:
        tr = _trace_first(G)
        subs = "".join(_LETTERS[1 : r + 1])
        out = out - jets.einsum(f"a,{subs}->a{subs}", tr, T) * w
    return out


def nabla(metric: Metric, T: Field) -> Field:
    """Covariant derivative of a tensor density field (derivative index first)."""
    kinds = T.kinds or ""

    def fn(x, k):
        return covariant_derivative(T.jet(x, k + 1), kinds, T.weight, metric.connection(x, k))

    return Field(fn, "d" + kinds, T.weight, f"nabla({T.label})")


def christoffel(g: Metric, x, order: int = 0) -> Connection:
    return g.connection(x, order)


def curvature(g: Metric, x, order: int = 0) -> CurvatureData:
    return g.curvature(x, order)


def covderiv_density(g: Metric, phi: Field, x, r: int = 2):
    """``(nabla phi, nabla nabla phi)`` values at ``x`` (second entry ``None`` if r=1).

    ``nabla nabla phi[j, i] = nabla_j nabla_i phi``.
    """
    if r not in (1, 2):
        raise ValueError("r must be 1 or 2")
    d1 = nabla(g, phi.with_meta(kinds=""))
    first = np.asarray(d1.jet(x, 0).value)
    if r == 1:
        return first, None
    return first, np.asarray(nabla(g, d1).jet(x, 0).value)


def covderiv_symbol(g: Metric, P: Field, x, r: int = 2):
    """``(nabla P, nabla nabla P)`` values; axes ``[k, i, j]`` and ``[l, k, i, j]``."""
    if r not in (1, 2):
        raise ValueError("r must be 1 or 2")
    d1 = nabla(g, P)
    first = np.asarray(d1.jet(x, 0).value)
    if r == 1:
        return first, None
    return first, np.asarray(nabla(g, d1).jet(x, 0).value)


# -- conformal rescaling identities -------------------------------------------

def rescaled_connection_formula(conn: Connection, F: Jet) -> Jet:
    """``Gamma + (1/2F)(F_i d^k_j + F_j d^k_i - F^k g_ij)`` for ``F*g``."""
    n = conn.gamma.shape[0]
    dF = F.gradient()
    Fk = jets.einsum("kt,t->k", conn.inverse, dF)
    eye = np.eye(n)
    term = (jets.einsum("i,kj->kij", dF, eye) + jets.einsum("j,ki->kij", dF, eye)
            - jets.einsum("k,ij->kij", Fk, conn.metric))
    return conn.gamma + term / (2 * F)


def _sym_ij(T: Jet, axes: tuple[int, int]) -> Jet:
    perm = list(range(len(T.shape)))
    a, b = axes
    perm[a], perm[b] = perm[b], perm[a]
    return T + T.transpose(perm)


def verify_rescaling_identities(g: Metric, F: Field, P: Field, x, f=None) -> dict[str, float]:
    """Both sides of the conformal-rescaling identities; max abs residual each.

    Checks the rescaled Christoffel symbols, ``nabla~ P``, ``nabla~ nabla~ P``
    and the scalar curvature; with a diffeomorphism ``f`` also ``ell~(f)`` and
    ``nabla~ ell~(f)``.
    """
    x = np.atleast_1d(np.asarray(x, float))
    Fx = F.jet(x, 0).value
    if Fx <= 0:
        raise MetricError(f"conformal factor must be positive, got {Fx}")
    gt = g.rescaled(F)
    n = x.size
    delta = float(P.weight)
    eye = np.eye(n)
    out: dict[str, float] = {}

    c = g.connection(x, 1)
    ct = gt.connection(x, 1)
    Fj = F.jet(x, 3)
    out["christoffel"] = _maxabs(ct.gamma.truncate(1) - rescaled_connection_formula(c, Fj.truncate(2)))

    # nabla~_k P^{ij}
    K = 1
    Pj = P.jet(x, K + 2)
    dP = covariant_derivative(Pj, "uu", delta, g.connection(x, K + 1))
    dPt = covariant_derivative(Pj, "uu", delta, gt.connection(x, K + 1))
    Fk = Fj.truncate(K + 1)
    dF = Fk.gradient()
    gk = g.connection(x, K + 1)
    Fup = jets.einsum("kt,t->k", gk.inverse, dF)
    P_ = Pj.truncate(K + 1)
    # Sym_{ij} P^{mi} (F_m d^j_k - F^j g_km)
    a1 = jets.einsum("mi,m->i", P_, dF)                 # P^{mi} F_m
    t1 = jets.einsum("i,jk->kij", a1, eye)             # P^{mi}F_m d^j_k
    gP = jets.einsum("km,mi->ki", gk.metric, P_)        # g_km P^{mi}
    t2 = jets.einsum("ki,j->kij", gP, Fup)             # F^j g_km P^{mi}
    sym = _sym_ij(t1 - t2, (1, 2))
    rhs = dP + (sym + jets.einsum("k,ij->kij", dF, P_) * (2 - n * delta)) / (2 * Fk)
    out["symbol_derivative"] = _maxabs(dPt - rhs)

    # nabla~_l nabla~_k P^{ij} = nabla_l V + ...  with V = nabla~ P (weight delta)
    V = dPt                                              # order K
    lhs = covariant_derivative(V, "duu", delta, gt.connection(x, K))
    base = covariant_derivative(V, "duu", delta, g.connection(x, K))
    F0 = Fj.truncate(K)
    dF0 = F0.gradient()
    g0 = g.connection(x, K)
    Fup0 = jets.einsum("st,t->s", g0.inverse, dF0)
    V0 = V.truncate(K - 1)
    s1 = (jets.einsum("l,kij->lkij", dF0, V0) * (1 - delta * n)
          - jets.einsum("k,lij->lkij", dF0, V0)
          + jets.einsum("lk,tij->lkij", g0.metric, jets.einsum("t,tij->tij", Fup0, V0)))
    # Sym_{ij} V_k^{mi} (F_m d^j_l - g^{sj} g_ml F_s)
    aF = jets.einsum("kmi,m->ki", V0, dF0)
    u1 = jets.einsum("ki,jl->lkij", aF, eye)
    gV = jets.einsum("ml,kmi->lki", g0.metric, V0)
    u2 = jets.einsum("lki,j->lkij", gV, Fup0)
    s2 = _sym_ij(u1 - u2, (2, 3))
    rhs2 = base + (s1 + s2) / (2 * F0)
    out["second_symbol_derivative"] = _maxabs(lhs - rhs2)

    # scalar curvature
    R = g.curvature(x, 0).scalar
    Rt = gt.curvature(x, 0).scalar
    F2 = Fj.truncate(2)
    dF2 = F2.gradient()
    hess = covariant_derivative(dF2, "d", 0, g.connection(x, 1))
    ginv = g.connection(x, 1).inverse
    lap = jets.einsum("ij,ij->", ginv, hess)
    grad2 = jets.einsum("ij,ij->", ginv, jets.einsum("i,j->ij", dF2, dF2))
    F00 = F2.truncate(0)
    rhs_R = (R - (n - 1) / F00 * (lap + (n - 6) / (4 * F00) * grad2)) / F00
    out["scalar_curvature"] = abs(float((Rt - rhs_R).value))

    if f is not None:
        from .actions import ell_field, pullback

        lt = ell_field(f, gt)
        l0 = ell_field(f, g)
        Fpb = pullback(f, F.with_meta(kinds="", weight=0))
        dFpb = pullback(f, _gradient_field(F))
        gpb = pullback(f, g.field)
        L = lt.jet(x, 1)
        Fpb_j = Fpb.jet(x, 1)
        gpb_j = gpb.jet(x, 1)
        term_f = _conf_difference(dFpb.jet(x, 1), Fpb_j, gpb_j, jets.matinv(gpb_j))
        gj = g.jet(x, 1)
        term_0 = _conf_difference(_gradient_field(F).jet(x, 1), F.jet(x, 1), gj, jets.matinv(gj))
        out["ell"] = _maxabs(L - (l0.jet(x, 1) + term_f - term_0))

        # nabla~_l ell~^k_ij
        lhs = covariant_derivative(L, "udd", 0, gt.connection(x, 0))
        base = covariant_derivative(L, "udd", 0, g.connection(x, 0))
        Fa = F.jet(x, 1)
        dFa = Fa.gradient()
        Fa0 = Fa.truncate(0)
        g0 = g.connection(x, 0)
        Fup = jets.einsum("st,t->s", g0.inverse, dFa)
        W = L.truncate(0)
        r1 = -jets.einsum("l,kij->lkij", dFa, W)
        FW = jets.einsum("t,tij->ij", dFa, W)                       # F_t W^t_ij
        r2 = jets.einsum("ij,kl->lkij", FW, eye)                    # F_t d^k_l W^t_ij
        gW = jets.einsum("tl,tij->lij", g0.metric, W)               # g_tl W^t_ij
        r3 = jets.einsum("k,lij->lkij", Fup, gW)                    # F^k g_tl W^t_ij
        # Sym_{ij} (F_i d^s_l - F^s g_il) W^k_js
        v1 = jets.einsum("i,kjl->lkij", dFa, W)                     # F_i W^k_jl
        FsW = jets.einsum("s,kjs->kj", Fup, W)                      # F^s W^k_js
        v2 = jets.einsum("il,kj->lkij", g0.metric, FsW)
        sym = _sym_ij(v1 - v2, (2, 3))
        rhs = base + (r1 + r2 - r3 - sym) / (2 * Fa0)
        out["ell_derivative"] = _maxabs(lhs - rhs)
    return out


def metric_compatibility(g: Metric, x) -> float:
    """``max |nabla_k g_ij|`` at ``x``."""
    x = np.atleast_1d(np.asarray(x, float))
    d = covariant_derivative(g.jet(x, 1), "dd", 0, g.connection(x, 0))
    return _maxabs(d)


def einstein_divergence(g: Metric, x) -> float:
    """``max_j |g^{ik} nabla_k G_ij|`` with ``G = Ric - R g / 2``."""
    x = np.atleast_1d(np.asarray(x, float))
    cv = g.curvature(x, 1)
    gj = g.jet(x, 1)
    G = cv.ricci - jets.einsum("ij,->ij", gj, cv.scalar) * 0.5
    c = g.connection(x, 0)
    dG = covariant_derivative(G, "dd", 0, c)                 # [k, i, j]
    return _maxabs(jets.einsum("ik,kij->j", c.inverse, dG))


def _gradient_field(F: Field) -> Field:
    return Field(lambda x, k: F.jet(x, k + 1).gradient(), "d", 0, f"d{F.label}")


def _conf_difference(dF: Jet, F: Jet, g: Jet, ginv: Jet) -> Jet:
    """``(1/2F)(Sym_{ij} F_i d^k_j - F_t g^{tk} g_ij)`` as ``[k, i, j]``."""
    n = g.shape[0]
    eye = np.eye(n)
    Fup = jets.einsum("kt,t->k", ginv, dF)
    t = jets.einsum("i,kj->kij", dF, eye)
    return (_sym_ij(t, (1, 2)) - jets.einsum("k,ij->kij", Fup, g)) / (2 * F)


def _maxabs(j: Jet) -> float:
    return float(np.max(np.abs(np.asarray(j.value))))
