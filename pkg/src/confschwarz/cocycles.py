"""Schwarzian-type cocycles of the conformal group and their relatives.

Every operator here maps a weight-``delta`` symbol field ``P`` of degree two
to a degree-one symbol (``A``, ``a``) or a density (``B``, ``b``, ``B2``).
Conjugated operators use :func:`~confschwarz.actions.pull_operator`, i.e.
``pull(f) o T o push(f)``, so that

    A(f o h) = h^* A(f) + A(h)

holds with the genuine pullback ``h^*`` on operators.  All coefficient
families are exact :class:`~fractions.Fraction` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import jets
from .actions import (Diffeo, connection_field, ell_field, lie_connection_field,
                      lie_operator, pull, pull_operator, trace_ell, traceless_ell)
from .fields import Field
from .geometry import Metric, covariant_derivative, nabla
from .jets import Jet

__all__ = [
    "CocycleError",
    "DimensionError",
    "CoefficientSet",
    "CocycleValue",
    "coeff_A",
    "coeff_B",
    "coeff_surface",
    "op_first",
    "op_laplace",
    "op_scalar_curvature",
    "op_yamabe",
    "yamabe_constant",
    "A_terms",
    "A_term_fields",
    "A_operator",
    "B_terms",
    "B_term_fields",
    "B_operator",
    "B_surface_term_fields",
    "B_surface_operator",
    "eval_A",
    "eval_B",
    "eval_a_inf",
    "eval_b_inf",
    "flow_derivative",
    "osgood_stowe",
    "osgood_stowe_field",
    "B_surface_terms",
    "eval_B_surface",
    "projective_symbol",
    "eval_C",
    "schwarzian_1d",
    "AuditResult",
    "audit_constants",
    "B_INF_WIRINGS",
    "SURFACE_VARIANTS",
]

B_INF_WIRINGS = ("c3", "c2")
DEFAULT_B_INF_WIRING = "c3"


class CocycleError(ValueError):
    """Invalid input to a cocycle evaluator."""


class DimensionError(CocycleError):
    """Operator not defined in this dimension."""


def _q(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class CoefficientSet:
    """Named exact-rational constants of one coefficient family.

    ``resonances`` lists the excluded weights that the parameters hit; the
    values are still returned when they are finite so that the coboundary
    cases can be evaluated.
    """

    family: str
    n: int
    delta: Fraction
    values: dict
    lam: Fraction | None = None
    mu: Fraction | None = None
    resonances: tuple = ()

    @property
    def resonant(self) -> bool:
        return bool(self.resonances)

    def __getitem__(self, key):
        return self.values[key]

    def as_tuple(self) -> tuple:
        return tuple(self.values.values())

    def as_floats(self) -> dict:
        return {k: float(v) for k, v in self.values.items()}


@dataclass
class CocycleValue:
    """Output of an evaluator at one point."""

    kind: str
    point: np.ndarray
    values: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.values))) if np.size(self.values) else 0.0


def coeff_A(n: int, delta) -> CoefficientSet:
    """``c = 2 - delta n``; ``delta = 2/n`` is the coboundary weight."""
    if n < 1:
        raise DimensionError("n must be >= 1")
    d = _q(delta)
    c = 2 - d * n
    res = (Fraction(2, n),) if d == Fraction(2, n) else ()
    return CoefficientSet("A", n, d, {"c": c}, resonances=res)


def coeff_B(n: int, delta) -> CoefficientSet:
    """``c1 ... c6``; ``delta = (n+2)/(2n)`` is the Yamabe coboundary weight."""
    if n <= 2:
        raise DimensionError("the second-order cocycle needs n > 2 (use the surface operator)")
    d = _q(delta)
    k = 2 + n * (1 - 2 * d)
    vals = {
        "c1": k,
        "c2": k * (d - 1) / n,
        "c3": k * (d * n - 2) / (n - 2),
        "c4": k * (2 * d - 2) / (n - 2),
        "c5": k * (1 - d) * n / (n - 2),
        "c6": Fraction(n) * (d - 1) * (n * d - 2) / ((n - 1) * (n - 2)),
    }
    yam = Fraction(n + 2, 2 * n)
    res = (yam,) if d == yam else ()
    return CoefficientSet("B", n, d, vals, resonances=res)


SURFACE_VARIANTS = ("corrected", "printed")


def coeff_surface(delta, variant: str = "corrected") -> CoefficientSet:
    """Prefactors of the surface operator, in display order.

    ``"printed"`` reads the display literally: ``8(delta-1)^2`` in front of
    the conjugated ``S``-difference and ``4(delta-1)^2`` in front of
    ``nabla_s ell^s_ij``.  ``"corrected"`` uses ``-8(delta-1)^2`` and
    ``4(1-delta)``, the unique values (given the other printed terms) that
    make the operator independent of the rescaling; they agree with the
    display at ``delta = 0`` up to the sign of the ``S`` term.
    """
    if variant not in SURFACE_VARIANTS:
        raise CocycleError(f"variant must be one of {SURFACE_VARIANTS}")
    d = _q(delta)
    s = 8 * (d - 1) ** 2
    vals = {
        "first": 4 * (1 - d),
        "quad": 4 * (1 - d) ** 2,
        "dtrace": 2 * (d - 2) * (1 - d),
        "schwarz": s if variant == "printed" else -s,
        "divl": s / 2 if variant == "printed" else 4 * (1 - d),
        "curv": d - 1,
    }
    return CoefficientSet("surface", 2, d, vals)


# -- base operators ------------------------------------------------------------

Operator = Callable[[Field], Field]


def op_first(g: Metric) -> Operator:
    """``P -> g^{sk} g_ij nabla_s P^{ij}`` (degree-one symbol)."""

    def T(P: Field) -> Field:
        dP = nabla(g, P)

        def fn(x, k):
            D = dP.jet(x, k)                              # [s, i, j]
            c = g.connection(x, k)
            tr = jets.einsum("ij,sij->s", c.metric.truncate(k), D)
            return jets.einsum("sk,s->k", c.inverse.truncate(k), tr)

        return Field(fn, "u", P.weight, "T1P")

    return T


def op_laplace(g: Metric) -> Operator:
    """``P -> g^{st} g_ij nabla_s nabla_t P^{ij}`` (density)."""

    def T(P: Field) -> Field:
        ddP = nabla(g, nabla(g, P))

        def fn(x, k):
            D = ddP.jet(x, k)                             # [s, t, i, j]
            c = g.connection(x, k)
            tr = jets.einsum("ij,stij->st", c.metric.truncate(k), D)
            return jets.einsum("st,st->", c.inverse.truncate(k), tr)

        return Field(fn, "", P.weight, "T2P")

    return T


def op_scalar_curvature(g: Metric) -> Operator:
    """``P -> R g_ij P^{ij}``."""

    def T(P: Field) -> Field:
        def fn(x, k):
            R = g.curvature(x, k).scalar
            gj = g.jet(x, k)
            return jets.einsum("ij,ij->", gj, P.jet(x, k)) * R

        return Field(fn, "", P.weight, "RgP")

    return T


def yamabe_constant(n: int) -> Fraction:
    """``(n-2) / (4(n-1))``."""
    if n < 2:
        raise DimensionError("the Yamabe operator needs n >= 2")
    return Fraction(n - 2, 4 * (n - 1))


def op_yamabe(g: Metric, n: int) -> Operator:
    """``P -> (g^{st} nabla_s nabla_t - (n-2)/(4(n-1)) R)(g_ij P^{ij})``."""
    lap, rg = op_laplace(g), op_scalar_curvature(g)
    y = float(yamabe_constant(n))

    def T(P: Field) -> Field:
        return lap(P) - rg(P) * y

    return T


def _conj_diff(f: Diffeo, T: Operator, P: Field) -> Field:
    return pull_operator(f, T)(P) - T(P)


def _contract2(M: Jet, P: Jet) -> Jet:
    return jets.einsum("ij,ij->", M, P)


# -- A ---------------------------------------------------------------------------

def _check_weight(P: Field, delta) -> Field:
    if P.kinds != "uu":
        raise CocycleError(f"expected a degree-two symbol, got kinds {P.kinds!r}")
    return P.with_meta(weight=_q(delta))


def _field(fn, kinds, weight, label) -> Field:
    return Field(fn, kinds, weight, label)


def _ell_parts(f: Diffeo, g: Metric, n: int):
    lf = ell_field(f, g)
    return lf, (lambda x, k: traceless_ell(lf.jet(x, k), n))


def A_term_fields(f: Diffeo, g: Metric, delta, P: Field, n: int) -> dict[str, Field]:
    """The conjugated part and the ``ell``-part of ``A(f)(P)`` as fields."""
    P = _check_weight(P, delta)
    _, Lt = _ell_parts(f, g, n)
    return {
        "conj": _conj_diff(f, op_first(g), P),
        "ell": _field(lambda x, k: jets.einsum("kij,ij->k", Lt(x, k), P.jet(x, k)),
                      "u", P.weight, "ellP"),
    }


def A_terms(f: Diffeo, g: Metric, delta, P: Field, x) -> dict[str, np.ndarray]:
    x = np.atleast_1d(np.asarray(x, float))
    return {k: np.asarray(v.jet(x, 0).value)
            for k, v in A_term_fields(f, g, delta, P, x.size).items()}


def _combine(terms: dict[str, Field], consts: dict[str, float]) -> Field:
    base = terms["conj"]

    def fn(x, k):
        out = base.jet(x, k)
        for name, c in consts.items():
            if c:
                out = out + terms[name].jet(x, k) * c
        return out

    return Field(fn, base.kinds, base.weight, "cocycle")


def A_operator(f: Diffeo, g: Metric, delta, n: int, c=None) -> Operator:
    """``P -> A(f)(P)`` as an operator on fields."""
    c = float(coeff_A(n, delta)["c"] if c is None else c)
    return lambda P: _combine(A_term_fields(f, g, delta, P, n), {"ell": c})


def eval_A(f: Diffeo, g: Metric, delta, P: Field, x, c=None) -> CocycleValue:
    """``A(f)(P)`` at ``x``; ``c`` overrides the printed constant."""
    x = np.atleast_1d(np.asarray(x, float))
    val = A_operator(f, g, delta, x.size, c)(P).jet(x, 0)
    return CocycleValue("symbol1", x, np.asarray(val.value))


# -- B ---------------------------------------------------------------------------

def _divergence(T: Jet, g: Metric, x) -> Jet:
    """``nabla_s T^s_ij`` for a ``udd`` jet (one order consumed)."""
    d = covariant_derivative(T, "udd", 0, g.connection(x, T.order - 1))
    return d.with_coeffs(np.einsum("ssijz->ijz", d.coeffs))


def B_term_fields(f: Diffeo, g: Metric, delta, P: Field, n: int) -> dict[str, Field]:
    """The seven pieces of ``B(f)(P)`` before multiplication by constants."""
    P = _check_weight(P, delta)
    lf, Lt = _ell_parts(f, g, n)
    dP = nabla(g, P)
    w = P.weight

    def t1(x, k):
        return jets.einsum("sij,sij->", Lt(x, k), dP.jet(x, k))

    def t2(x, k):
        tr = trace_ell(lf.jet(x, k))
        return _contract2(jets.einsum("i,j->ij", tr, tr), P.jet(x, k))

    def t3(x, k):
        return _contract2(_divergence(Lt(x, k + 1), g, x), P.jet(x, k))

    def t4(x, k):
        l0 = lf.jet(x, k)
        return _contract2(jets.einsum("sij,s->ij", l0, trace_ell(l0)), P.jet(x, k))

    def t5(x, k):
        l0 = lf.jet(x, k)
        return _contract2(jets.einsum("usi,suj->ij", l0, l0), P.jet(x, k))

    out = {"conj": _conj_diff(f, op_laplace(g), P)}
    for name, fn in (("c1", t1), ("c2", t2), ("c3", t3), ("c4", t4), ("c5", t5)):
        out[name] = _field(fn, "", w, name)
    out["c6"] = _conj_diff(f, op_scalar_curvature(g), P)
    return out


def B_terms(f: Diffeo, g: Metric, delta, P: Field, x) -> dict[str, float]:
    x = np.atleast_1d(np.asarray(x, float))
    return {k: float(v.jet(x, 0).value)
            for k, v in B_term_fields(f, g, delta, P, x.size).items()}


def B_operator(f: Diffeo, g: Metric, delta, n: int, consts: dict | None = None) -> Operator:
    """``P -> B(f)(P)``; ``consts`` overrides any of ``c1 ... c6``."""
    cs = coeff_B(n, delta).as_floats()
    cs.update({k: float(v) for k, v in (consts or {}).items()})
    return lambda P: _combine(B_term_fields(f, g, delta, P, n), cs)


def eval_B(f: Diffeo, g: Metric, delta, P: Field, x, consts: dict | None = None) -> CocycleValue:
    """``B(f)(P)`` at ``x``."""
    x = np.atleast_1d(np.asarray(x, float))
    val = B_operator(f, g, delta, x.size, consts)(P).jet(x, 0)
    return CocycleValue("density", x, np.asarray(float(val.value)))


# -- infinitesimal versions ----------------------------------------------------

def eval_a_inf(X: Field, g: Metric, delta, P: Field, x, c=None) -> CocycleValue:
    """``a(X)(P) = L_X(T1)(P) + c (L_X nabla)_0 P`` at ``x``."""
    P = _check_weight(P, delta)
    x = np.atleast_1d(np.asarray(x, float))
    n = x.size
    c = coeff_A(n, delta)["c"] if c is None else c
    lie = lie_operator(X, op_first(g))(P).jet(x, 0)
    L = traceless_ell(lie_connection_field(X, g).jet(x, 0), n)
    val = np.asarray(lie.value) + float(c) * np.asarray(
        jets.einsum("kij,ij->k", L, P.jet(x, 0)).value)
    return CocycleValue("symbol1", x, val)


def eval_b_inf(X: Field, g: Metric, delta, P: Field, x, wiring: str = DEFAULT_B_INF_WIRING,
               consts: dict | None = None) -> CocycleValue:
    """``b(X)(P)``.

    ``wiring`` selects the constant in front of the divergence term: ``"c3"``
    (the derivative of ``B`` along flows) or ``"c2"`` (as displayed).
    """
    if wiring not in B_INF_WIRINGS:
        raise CocycleError(f"wiring must be one of {B_INF_WIRINGS}")
    P = _check_weight(P, delta)
    x = np.atleast_1d(np.asarray(x, float))
    n = x.size
    cs = coeff_B(n, delta).as_floats()
    cs.update({k: float(v) for k, v in (consts or {}).items()})
    lie = lie_operator(X, op_laplace(g))(P).jet(x, 0)
    Lj = traceless_ell(lie_connection_field(X, g).jet(x, 1), n)
    dP = nabla(g, P).jet(x, 0)
    dL = covariant_derivative(Lj, "udd", 0, g.connection(x, 0))
    divL = dL.with_coeffs(np.einsum("ssijz->ijz", dL.coeffs))
    t1 = jets.einsum("sij,sij->", Lj.truncate(0), dP)
    t3 = _contract2(divL, P.jet(x, 0))
    t6 = lie_operator(X, op_scalar_curvature(g))(P).jet(x, 0)
    val = float(lie.value) + cs["c1"] * float(t1.value) + cs[wiring] * float(t3.value) \
        + cs["c6"] * float(t6.value)
    return CocycleValue("density", x, np.asarray(val))


# -- surfaces --------------------------------------------------------------------

def flow_derivative(family: str, X: Field, g: Metric, delta, P: Field, x, t: float = 2.5e-4,
                    consts=None) -> np.ndarray:
    """Central difference ``(C(phi_t) - C(phi_-t)) / 2t`` along the flow of ``X``.

    ``family`` is ``"A"`` or ``"B"``; the result approximates ``a(X)`` or
    ``b(X)`` with an ``O(t^2)`` error.
    """
    from .actions import flow_diffeo

    ev = {"A": eval_A, "B": eval_B}.get(family)
    if ev is None:
        raise CocycleError("family must be 'A' or 'B'")
    x = np.atleast_1d(np.asarray(x, float))
    plus = ev(flow_diffeo(X, t), g, delta, P, x, consts).values
    minus = ev(flow_diffeo(X, -t), g, delta, P, x, consts).values
    return (np.asarray(plus) - np.asarray(minus)) / (2 * t)


def _positive(F: Jet, x) -> None:
    if float(F.value) <= 0:
        raise CocycleError(f"conformal factor must be positive at {x}")


def osgood_stowe_field(F: Field, g: Metric) -> Field:
    """``S = (1/2F) nabla dF - (3/4F^2) dF dF + (1/8F^2) |dF|^2 g`` as a field."""

    def fn(x, k):
        Fj = F.jet(x, k + 2)
        _positive(Fj, x)
        dF = Fj.gradient()
        hess = covariant_derivative(dF, "d", 0, g.connection(x, k))
        dF = dF.truncate(k)
        F0 = Fj.truncate(k)
        c = g.connection(x, k)
        ginv = c.inverse.truncate(k)
        gg = c.metric.truncate(k)
        sq = jets.einsum("ij,ij->", ginv, jets.einsum("i,j->ij", dF, dF))
        return (hess / (2 * F0) - jets.einsum("i,j->ij", dF, dF) * 0.75 / (F0 * F0)
                + gg * sq / (8 * F0 * F0))

    return Field(fn, "dd", 0, f"S({F.label})")


def osgood_stowe(F: Field, g: Metric, x) -> CocycleValue:
    x = np.atleast_1d(np.asarray(x, float))
    return CocycleValue("covariant2", x, np.asarray(osgood_stowe_field(F, g).jet(x, 0).value))


def B_surface_term_fields(f: Diffeo, g: Metric, delta, P: Field, F: Field,
                          S_metric: Metric | None = None) -> dict[str, Field]:
    """Pieces of the surface operator before the ``delta``-prefactors.

    ``F`` is the flattening factor with ``g = F^{-1} psi^* g0``; the tensor
    ``S`` is built with ``S_metric`` (default ``g``).
    """
    P = _check_weight(P, delta)
    if F is None:
        raise CocycleError("missing flattening data")
    n = 2
    eye = np.eye(n)
    lf, Lt = _ell_parts(f, g, n)
    dP = nabla(g, P)
    w = P.weight

    def first(x, k):
        return jets.einsum("sij,sij->", Lt(x, k), dP.jet(x, k))

    def quad(x, k):
        l0 = lf.jet(x, k)
        tr = trace_ell(l0)
        s = jets.einsum("j,si->sij", tr, eye)
        q = l0 - (s + s.transpose(0, 2, 1)) * 0.25
        return _contract2(jets.einsum("s,sij->ij", tr, q), P.jet(x, k))

    def dtrace(x, k):
        d = covariant_derivative(trace_ell(lf.jet(x, k + 1)), "d", 0, g.connection(x, k))
        return _contract2(d + d.transpose(), P.jet(x, k))

    def divl(x, k):
        return _contract2(_divergence(lf.jet(x, k + 1), g, x), P.jet(x, k))

    S = osgood_stowe_field(F, S_metric or g)
    return {
        "conj": _conj_diff(f, op_laplace(g), P),
        "first": _field(first, "", w, "first"),
        "quad": _field(quad, "", w, "quad"),
        "dtrace": _field(dtrace, "", w, "dtrace"),
        "schwarz": _conj_diff(f, _zeroth(S), P),
        "divl": _field(divl, "", w, "divl"),
        "curv": _conj_diff(f, op_scalar_curvature(g), P),
    }


def _zeroth(S: Field) -> Operator:
    def T(P: Field) -> Field:
        return Field(lambda x, k: _contract2(S.jet(x, k), P.jet(x, k)), "", P.weight, "SP")

    return T


def _check_surface(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, float))
    if x.size != 2:
        raise DimensionError("the surface operator needs n = 2")
    return x


def B_surface_terms(f: Diffeo, g: Metric, delta, P: Field, F: Field, x,
                    S_metric: Metric | None = None) -> dict[str, float]:
    x = _check_surface(x)
    return {k: float(v.jet(x, 0).value)
            for k, v in B_surface_term_fields(f, g, delta, P, F, S_metric).items()}


def B_surface_operator(f: Diffeo, g: Metric, delta, F: Field, S_metric: Metric | None = None,
                       variant: str = "corrected") -> Operator:
    cs = coeff_surface(delta, variant).as_floats()
    return lambda P: _combine(B_surface_term_fields(f, g, delta, P, F, S_metric), cs)


def eval_B_surface(f: Diffeo, g: Metric, delta, P: Field, F: Field, x,
                   S_metric: Metric | None = None, variant: str = "corrected") -> CocycleValue:
    """The surface operator ``B'_2(f)(P)`` at ``x``."""
    x = _check_surface(x)
    val = B_surface_operator(f, g, delta, F, S_metric, variant)(P).jet(x, 0)
    return CocycleValue("density", x, np.asarray(float(val.value)))


# -- projective comparison -------------------------------------------------------

def projective_symbol(gamma, n: int | None = None):
    """``Pi^k_ij = Gamma^k_ij - (d^k_i Gamma_j + d^k_j Gamma_i)/(n+1)``.

    Accepts a Jet or an array of shape ``(n, n, n)``.
    """
    if isinstance(gamma, Jet):
        n = gamma.shape[0] if n is None else n
        tr = gamma.with_coeffs(np.einsum("jijz->iz", gamma.coeffs))
        s = jets.einsum("j,ki->kij", tr, np.eye(n))
        return gamma - (s + s.transpose(0, 2, 1)) / (n + 1)
    G = np.asarray(gamma, float)
    n = G.shape[0] if n is None else n
    tr = np.einsum("jij->i", G)
    eye = np.eye(n)
    return G - (np.einsum("ki,j->kij", eye, tr) + np.einsum("kj,i->kij", eye, tr)) / (n + 1)


def eval_C(f: Diffeo, source, x) -> CocycleValue:
    """``C(f) = Pi(f^*Gamma) - Pi(Gamma)`` for a metric or connection field."""
    from .actions import pulled_connection

    x = np.atleast_1d(np.asarray(x, float))
    gam = connection_field(source)
    a = projective_symbol(pulled_connection(f, gam).jet(x, 0))
    b = projective_symbol(gam.jet(x, 0))
    return CocycleValue("tensor21", x, np.asarray((a - b).value))


def schwarzian_1d(f, x: float) -> float:
    """``f'''/f' - 3/2 (f''/f')^2`` for ``f`` a function of a 1-D jet."""
    j = jets.jet_lift(lambda X: f(X[0]), [float(x)], 3)
    d1, d2, d3 = (jets.jet_derivative(j, (k,)) for k in (1, 2, 3))
    if d1 == 0:
        raise CocycleError("f'(x) = 0")
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


# -- coefficient audit ---------------------------------------------------------

@dataclass
class AuditResult:
    family: str
    n: int
    delta: Fraction
    printed: dict
    fitted: dict = field(default_factory=dict)
    distance: float = float("nan")
    residual_fitted: float = float("nan")
    residual_printed: float = float("nan")
    rank: int = 0
    inconclusive: bool = False
    typo_flag: bool = False
    message: str = ""


def _audit_rows(family, n, delta, samples, rng):
    """Rows ``b + M c = 0`` from rescaling invariance and flat-conformal vanishing."""
    from .fields import random_symbol, Field as _F
    from .flatmodel import all_generators, conformal_map, flat_metric, compose_maps

    rows, rhs = [], []
    names = ("c",) if family == "A" else ("c1", "c2", "c3", "c4", "c5", "c6")
    terms = A_terms if family == "A" else B_terms
    for s in range(samples):
        x = rng.uniform(-0.3, 0.3, n)
        P = random_symbol(n, 2, delta, rng)
        # rescaling invariance on a curved metric
        g = _random_metric(n, rng)
        F = _random_factor(n, rng)
        f = _random_diffeo(n, rng)
        t0 = terms(f, g, delta, P, x)
        t1 = terms(f, g.rescaled(F), delta, P, x)
        _append(rows, rhs, names, t0, t1)
        # flat conformal vanishing
        p = (n + 1) // 2
        sig = (p, n - p)
        b = rng.uniform(-0.15, 0.15, n)
        m = compose_maps(conformal_map("special-conformal", {"b": b}, sig),
                         conformal_map("dilation", {"a": float(rng.uniform(0.7, 1.4))}, sig))
        t = terms(m.diffeo, flat_metric(*sig), delta, P, x)
        _append(rows, rhs, names, t, None)
    return names, np.array(rows), np.array(rhs)


def _append(rows, rhs, names, t0, t1):
    a = {k: np.atleast_1d(np.asarray(v, float)) for k, v in t0.items()}
    if t1 is not None:
        for k, v in t1.items():
            a[k] = a[k] - np.atleast_1d(np.asarray(v, float))
    conj = a.pop("conj")
    key = "ell" if "ell" in a else None
    cols = [a[key]] if key else [a[k] for k in names]
    for r in range(conj.size):
        rows.append([c[r] for c in cols])
        rhs.append(-conj[r])


def _random_metric(n, rng):
    from .sampling import random_metric
    return random_metric(n, rng)


def _random_factor(n, rng):
    from .sampling import random_factor
    return random_factor(n, rng)


def _random_diffeo(n, rng):
    from .sampling import random_diffeo
    return random_diffeo(n, rng)


def audit_constants(family: str, n: int, delta, samples: int = 6, seed: int = 0,
                    tol: float = 1e-4) -> AuditResult:
    """Fit the constants of ``A`` or ``B`` from the defining invariances.

    Every sample contributes rows from rescaling invariance (random curved
    metric, random factor, random diffeomorphism) and from vanishing on a
    flat conformal map.  The least-squares fit is compared with the printed
    constants; a rank-deficient or not overdetermined system is inconclusive.
    """
    if family not in ("A", "B"):
        raise CocycleError("family must be 'A' or 'B'")
    delta = _q(delta)
    printed = (coeff_A(n, delta) if family == "A" else coeff_B(n, delta)).values
    res = AuditResult(family, n, delta, dict(printed))
    rng = np.random.default_rng(seed)
    names, M, b = _audit_rows(family, n, delta, samples, rng)
    res.rank = int(np.linalg.matrix_rank(M, tol=1e-9 * max(1.0, np.max(np.abs(M)))))
    if M.shape[0] <= len(names) or res.rank < len(names):
        res.inconclusive = True
        res.message = f"rank {res.rank} with {M.shape[0]} rows for {len(names)} unknowns"
        return res
    sol, *_ = np.linalg.lstsq(M, b, rcond=None)
    res.fitted = dict(zip(names, (float(v) for v in sol)))
    pv = np.array([float(printed[k]) for k in names])
    res.distance = float(np.max(np.abs(sol - pv)))
    scale = max(1.0, float(np.max(np.abs(b))))
    res.residual_fitted = float(np.max(np.abs(M @ sol - b))) / scale
    res.residual_printed = float(np.max(np.abs(M @ pv - b))) / scale
    res.typo_flag = res.residual_printed > tol and res.residual_fitted <= tol
    res.message = "suspected typo in printed constants" if res.typo_flag else "printed constants pass"
    return res
