"""Conformally equivariant quantization of symbols of degree at most two.

A quantized operator maps a weight-``lambda`` density ``phi`` to a
weight-``mu`` density; the symbols carry weight ``delta = mu - lambda``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import jets
from .actions import Diffeo, ell_field, pull, push
from .cocycles import (A_operator, B_operator, CoefficientSet, DimensionError, _q,
                       osgood_stowe_field)
from .fields import Field
from .geometry import Metric, covariant_derivative, nabla

__all__ = [
    "ResonanceError",
    "SURFACE_Q_VARIANTS",
    "QuantizationError",
    "Symbols",
    "coeff_alpha",
    "coeff_q1",
    "resonant_value",
    "coeff_d",
    "deformation_coefficients",
    "quantize1",
    "quantize2",
    "quantize",
    "quantize_surface",
    "quantize_op",
    "deformed_action",
    "verify_q2_rescaling",
    "conformal_pair",
    "proof_identities",
    "deformed_group_law",
]


class QuantizationError(ValueError):
    """Invalid quantization input."""


class ResonanceError(QuantizationError):
    """``delta`` hits an excluded weight.

    Attributes:
        excluded: the excluded value that was hit.
    """

    def __init__(self, message: str, excluded: Fraction):
        super().__init__(message)
        self.excluded = excluded


@dataclass
class Symbols:
    """A symbol of degree at most two: any of the parts may be ``None``."""

    P2: Field | None = None
    P1: Field | None = None
    P0: Field | None = None


def _excluded_q2(n: int) -> tuple:
    return (Fraction(2, n), Fraction(n + 2, 2 * n), Fraction(n + 1, n), Fraction(n + 2, n))


EXCLUDED_SURFACE = (Fraction(1), Fraction(2), Fraction(3, 2), Fraction(5, 2))


def _check(delta: Fraction, excluded, what: str) -> None:
    for e in excluded:
        if delta == e:
            raise ResonanceError(f"{what}: delta = {delta} is an excluded weight", e)


def _over_one_minus_delta(num: Fraction, lam: Fraction, d: Fraction, what: str) -> Fraction:
    """``num / (1 - delta)`` for a numerator carrying a factor ``lambda``.

    At ``delta = 1`` the quotient is ``0/0`` when ``lambda = 0`` and its value
    along ``lambda = 0`` is zero; any other weight at ``delta = 1`` is resonant.
    """
    if d == 1:
        if lam == 0:
            return Fraction(0)
        raise ResonanceError(f"{what}: delta = 1 is an excluded weight", Fraction(1))
    return num / (1 - d)


def resonant_value(family: str, n: int, lam, mu) -> Fraction | None:
    """The excluded value of ``delta`` hit by ``(lam, mu)`` for ``family``, else ``None``.

    Families: ``q1`` (first-order map), ``q2`` (second-order map on a pure
    degree-two symbol), ``q`` (full map on a symbol with every degree), ``d``
    (metric-change coefficients), ``deformed`` (deformed action) and ``surface``.
    """
    lam, mu = _q(lam), _q(mu)
    d = mu - lam
    one = (Fraction(1),) if lam != 0 else ()
    table = {
        "q1": one,
        "q2": _excluded_q2(n),
        "q": _excluded_q2(n) + one,
        "d": _excluded_q2(n) + one,
        "deformed": _excluded_q2(n) + one,
        "surface": EXCLUDED_SURFACE,
    }
    if family not in table:
        raise QuantizationError(f"unknown coefficient family {family!r}")
    return d if d in table[family] else None


def coeff_q1(lam, mu) -> CoefficientSet:
    """``alpha = lambda / (1 - delta)``; at ``(0, 1)`` the removable value 0."""
    lam, mu = _q(lam), _q(mu)
    d = mu - lam
    alpha = _over_one_minus_delta(lam, lam, d, "first-order quantization")
    return CoefficientSet("alpha1", 0, d, {"alpha": alpha}, lam, mu)


SURFACE_Q_VARIANTS = ("corrected", "printed")


def coeff_alpha(n: int, lam, mu, surface: bool = False, variant: str = "corrected"
                ) -> CoefficientSet:
    """``alpha_1 ... alpha_6`` of the second-order quantization, plus ``alpha``.

    On surfaces (``surface=True``) the curvature constants are replaced by the
    ``S``-correction prefactors ``kS`` and
    ``kR``, entering as ``kS (S_ij P^ij + kR R g_ij P^ij)``.  The ``printed``
    variant is ``kS = 4 lambda (mu-1)/(2 delta - 3)``, ``kR = 1/(8 (delta-1))``.
    The default ``corrected`` variant flips the sign of both, which is the only
    choice that makes the map agree with the curvature-free quantization of
    ``psi^* g0`` (fitted by least squares, then checked in the test suite).
    """
    lam, mu = _q(lam), _q(mu)
    d = mu - lam
    if surface:
        if n != 2:
            raise DimensionError("surface coefficients need n = 2")
        _check(d, EXCLUDED_SURFACE, "surface quantization")
    else:
        if n <= 2:
            raise DimensionError("second-order quantization needs n > 2 (use the surface map)")
        _check(d, _excluded_q2(n), "second-order quantization")
    a = 2 + n * (1 - d)
    b = 1 + n * (1 - d)
    c = 2 + n * (1 - 2 * d)
    e = 2 - n * d
    vals = {
        "alpha1": 2 * (n * lam + 1) / a,
        "alpha2": n * (lam + mu - 1) / (a * e),
        "alpha3": n * lam * (n * lam + 1) / (b * a),
        "alpha4": n * lam * (n * n * mu * (2 - lam - mu) + 2 * (n * lam + 1) ** 2 - n * (n + 1))
        / (b * a * c * e),
    }
    if surface:
        if variant not in SURFACE_Q_VARIANTS:
            raise QuantizationError(f"unknown surface variant {variant!r}")
        sign = 1 if variant == "printed" else -1
        vals["kS"] = sign * 4 * lam * (mu - 1) / (2 * d - 3)
        vals["kR"] = sign / (8 * (d - 1))
    else:
        vals["alpha5"] = Fraction(n * n) * lam * (mu - 1) / ((n - 2) * b)
        vals["alpha6"] = (n * d - 2) / ((n - 1) * c) * vals["alpha5"]
    if d != 1 or lam == 0:
        vals["alpha"] = _over_one_minus_delta(lam, lam, d, "alpha")
    return CoefficientSet("alpha", n, d, vals, lam, mu)


def coeff_d(n: int, lam, mu) -> CoefficientSet:
    """``d_1, d_2, d_3`` of the metric-change relation."""
    lam, mu = _q(lam), _q(mu)
    d = mu - lam
    for e, why in ((Fraction(n + 2, n), "2+n(1-delta)"), (Fraction(2, n), "2-n delta"),
                   (Fraction(n + 2, 2 * n), "2+n(1-2delta)"), (Fraction(n + 1, n), "1+n(1-delta)")):
        if d == e:
            raise ResonanceError(f"d-coefficients: factor {why} vanishes at delta = {d}", e)
    a = (2 + n * (1 - d)) * (2 - n * d)
    vals = {
        "d1": n * (lam + mu - 1) / a,
        "d2": _over_one_minus_delta(n * lam * (lam + mu - 1) / a, lam, d, "d-coefficients"),
        "d3": -_over_one_minus_delta(n * lam * (mu - 1) / ((2 + n * (1 - 2 * d)) * (1 + n * (1 - d))),
                                     lam, d, "d-coefficients"),
    }
    return CoefficientSet("d", n, d, vals, lam, mu)


def deformation_coefficients(n: int, lam, mu) -> dict:
    """Prefactors of the ``A`` and ``B`` corrections in the deformed action."""
    lam, mu = _q(lam), _q(mu)
    d = mu - lam
    _check(d, _excluded_q2(n), "deformed action")
    return {
        "a": n * (mu + lam - 1) / ((2 + n * (1 - d)) * (2 - n * d)),
        "b": _over_one_minus_delta(
            n * lam * (mu - 1) / ((2 + n * (1 - 2 * d)) * (1 + n * (1 - d))), lam, d,
            "deformed action"),
    }


# -- operator assembly -----------------------------------------------------------

def _with_weight(P: Field | None, kinds: str, delta) -> Field | None:
    if P is None:
        return None
    if (P.kinds or "") != kinds:
        raise QuantizationError(f"symbol part has kinds {P.kinds!r}, expected {kinds!r}")
    return P.with_meta(weight=delta)


def _q1_terms(g: Metric, alpha: float, P1: Field | None, P0: Field | None, phi: Field, x, k):
    """``P^i nabla_i phi + alpha (nabla_i P^i) phi + P0 phi`` as a jet of order ``k``."""
    out = None
    ph = phi.jet(x, k)
    if P1 is not None:
        c = g.connection(x, k)
        dphi = covariant_derivative(phi.jet(x, k + 1), "", phi.weight, c)
        out = jets.einsum("i,i->", P1.jet(x, k), dphi)
        if alpha:
            dP = covariant_derivative(P1.jet(x, k + 1), "u", P1.weight, c)
            out = out + dP.with_coeffs(np.einsum("iiz->z", dP.coeffs)) * ph * alpha
    if P0 is not None:
        t = P0.jet(x, k) * ph
        out = t if out is None else out + t
    return out


def _q2_terms(g: Metric, al: dict, P: Field, phi: Field, x, k, surface_S: Field | None = None):
    c1 = g.connection(x, k + 1)
    c0 = g.connection(x, k)
    lam = phi.weight
    dphi = covariant_derivative(phi.jet(x, k + 2), "", lam, c1)          # order k+1
    ddphi = covariant_derivative(dphi, "d", lam, c0)                     # [j, i]
    Pj = P.jet(x, k + 2)
    dP = covariant_derivative(Pj, "uu", P.weight, c1)                    # [s, i, j]
    ddP = covariant_derivative(dP, "duu", P.weight, c0)                  # [t, s, i, j]
    dP0 = dP.truncate(k)
    P0 = Pj.truncate(k)
    ph = phi.jet(x, k)
    gk, ginv = c0.metric.truncate(k), c0.inverse.truncate(k)
    out = jets.einsum("ij,ij->", P0, ddphi.transpose())
    div = dP0.with_coeffs(np.einsum("iijz->jz", dP0.coeffs))          # nabla_i P^{ij}
    trd = jets.einsum("kl,ikl->i", gk, dP0)                            # g_kl nabla_i P^{kl}
    vec = div * float(al["alpha1"]) + jets.einsum("ij,i->j", ginv, trd) * float(al["alpha2"])
    out = out + jets.einsum("j,j->", vec, dphi.truncate(k))
    zero = None
    if al["alpha3"]:
        t3 = ddP.with_coeffs(np.einsum("ijijz->z", ddP.coeffs))      # nabla_i nabla_j P^{ij}
        zero = t3 * float(al["alpha3"])
    if al["alpha4"]:
        lap = jets.einsum("st,st->", ginv, jets.einsum("ij,stij->st", gk, ddP))
        t4 = lap * float(al["alpha4"])
        zero = t4 if zero is None else zero + t4
    needs_R = al.get("alpha5") or al.get("alpha6") or (surface_S is not None and al["kS"])
    if needs_R:
        curv = g.curvature(x, k)
        trP = jets.einsum("ij,ij->", gk, P0)
        if surface_S is not None:
            SP = jets.einsum("ij,ij->", surface_S.jet(x, k), P0)
            t = (SP + curv.scalar * trP * float(al["kR"])) * float(al["kS"])
        else:
            t = jets.einsum("ij,ij->", curv.ricci, P0) * float(al["alpha5"]) \
                + curv.scalar * trP * float(al["alpha6"])
        zero = t if zero is None else zero + t
    if zero is not None:
        out = out + zero * ph
    return out


def quantize_op(g: Metric, lam, mu, symbols: Symbols, n: int | None = None,
                surface_F: Field | None = None, S_metric: Metric | None = None,
                variant: str = "corrected"):
    """The quantized operator ``phi -> Q(P)(phi)`` as a map from fields to fields."""
    lam, mu = _q(lam), _q(mu)
    d = mu - lam
    P2 = _with_weight(symbols.P2, "uu", d)
    P1 = _with_weight(symbols.P1, "u", d)
    P0 = _with_weight(symbols.P0, "", d)
    al2 = None
    S = None
    if P2 is not None:
        if n is None:
            raise QuantizationError("dimension needed for the second-order part")
        surface = surface_F is not None
        al2 = coeff_alpha(n, lam, mu, surface=surface, variant=variant).values
        if surface:
            S = osgood_stowe_field(surface_F, S_metric or g)
    al1 = float(coeff_q1(lam, mu)["alpha"]) if P1 is not None else 0.0

    def Q(phi: Field) -> Field:
        phi = phi.with_meta(kinds="", weight=lam)

        def fn(x, k):
            out = _q1_terms(g, al1, P1, P0, phi, x, k)
            if P2 is not None:
                t = _q2_terms(g, al2, P2, phi, x, k, S)
                out = t if out is None else out + t
            if out is None:
                out = phi.jet(x, k) * 0.0
            return out

        return Field(fn, "", mu, "Q(P)phi")

    return Q


def quantize1(g: Metric, lam, mu, P1: Field | None, P0: Field | None, phi: Field, x) -> jets.Jet:
    """``Q(P)phi = P^i nabla_i phi + alpha nabla_i P^i phi + P0 phi`` at ``x``."""
    return quantize_op(g, lam, mu, Symbols(None, P1, P0))(phi).jet(x, 0)


def quantize2(g: Metric, lam, mu, P2: Field, phi: Field, x) -> jets.Jet:
    """Second-order quantization of a degree-two symbol, applied to ``phi`` at ``x``."""
    n = len(np.atleast_1d(x))
    return quantize_op(g, lam, mu, Symbols(P2), n)(phi).jet(x, 0)


def quantize(g: Metric, lam, mu, symbols: Symbols, phi: Field, x) -> jets.Jet:
    n = len(np.atleast_1d(x))
    return quantize_op(g, lam, mu, symbols, n)(phi).jet(x, 0)


def quantize_surface(g: Metric, lam, mu, symbols: Symbols, F: Field | None, phi: Field, x,
                     S_metric: Metric | None = None, variant: str = "corrected") -> jets.Jet:
    """Surface quantization; ``F`` is the flattening factor (``g = F^{-1} psi^* g0``).

    The Osgood-Stowe tensor is built from ``F`` with the metric ``g`` itself
    unless ``S_metric`` is given.
    """
    x = np.atleast_1d(np.asarray(x, float))
    if x.size != 2:
        raise DimensionError("the surface quantization needs n = 2")
    if F is None:
        raise QuantizationError("missing flattening data")
    return quantize_op(g, lam, mu, symbols, 2, surface_F=F, S_metric=S_metric,
                       variant=variant)(phi).jet(x, 0)


# -- deformation of the symbol module ------------------------------------------

def deformed_action(f: Diffeo, g: Metric, lam, mu, symbols: Symbols, n: int) -> Symbols:
    """``(T2, T1, T0)``: the symbol action conjugated by the quantization.

    ``T2 = f_delta P2``; ``T1 = f_delta P1 + a A(f^{-1})(f_delta P2)``;
    ``T0 = f_delta P0 - b B(f^{-1})(f_delta P2)`` where ``A(f^{-1})`` acts on
    symbols at the image point.
    """
    lam, mu = _q(lam), _q(mu)
    d = mu - lam
    P2 = _with_weight(symbols.P2, "uu", d)
    P1 = _with_weight(symbols.P1, "u", d)
    P0 = _with_weight(symbols.P0, "", d)
    T2 = push(f, P2) if P2 is not None else None
    T1 = push(f, P1) if P1 is not None else None
    T0 = push(f, P0) if P0 is not None else None
    if T2 is not None:
        co = deformation_coefficients(n, lam, mu)
        finv = f.inverse()
        if co["a"]:
            cA = A_operator(finv, g, d, n)(T2)
            corr1 = Field(lambda x, k: cA.jet(x, k) * float(co["a"]), "u", d, "aA")
            T1 = corr1 if T1 is None else T1 + corr1
        if co["b"] and n > 2:
            cB = B_operator(finv, g, d, n)(T2)
            corr0 = Field(lambda x, k: cB.jet(x, k) * float(-co["b"]), "", d, "bB")
            T0 = corr0 if T0 is None else T0 + corr0
    return Symbols(T2, T1, T0)


# -- change of metric in the conformal class -------------------------------------

def conformal_pair(g: Metric, psi: Diffeo, F: Field) -> Metric:
    """``g~ = F^{-1} psi_* g`` (``psi_*`` the push-forward)."""
    pg = push(psi, g.field)

    def fn(x, k):
        return pg.jet(x, k) / F.jet(x, k)

    return Metric(Field(fn, "dd", 0, "g~"), g.signature, label="g~")


def verify_q2_rescaling(g: Metric, psi: Diffeo, F: Field, lam, mu, P: Field, phi: Field, x,
                        gt: Metric | None = None) -> float:
    """Residual of ``Q^{g~}(P) = Q^g(P) + d1 A^s(psi^-1)(P) nabla_s
    + d2 nabla_s(A^s(psi^-1)(P)) + d3 B(psi^-1)(P)`` applied to ``phi`` at ``x``.

    ``g~ = F^{-1} psi_* g`` unless given; the cocycles use the metric ``g``.
    """
    x = np.atleast_1d(np.asarray(x, float))
    n = x.size
    lam, mu = _q(lam), _q(mu)
    d = mu - lam
    if gt is None:
        gt = conformal_pair(g, psi, F)
    if np.any(np.asarray(F.jet(x, 0).value) <= 0):
        raise QuantizationError("conformal factor must be positive")
    P = P.with_meta(weight=d)
    phi = phi.with_meta(kinds="", weight=lam)
    lhs = quantize_op(gt, lam, mu, Symbols(P), n)(phi).jet(x, 0)
    base = quantize_op(g, lam, mu, Symbols(P), n)(phi).jet(x, 0)
    ds = coeff_d(n, lam, mu).as_floats()
    psi_inv = psi.inverse()
    Af = A_operator(psi_inv, g, d, n)(P)
    c = g.connection(x, 0)
    dphi = covariant_derivative(phi.jet(x, 1), "", lam, c)
    corr = jets.einsum("s,s->", Af.jet(x, 0), dphi) * ds["d1"]
    dA = covariant_derivative(Af.jet(x, 1), "u", d, c)
    corr = corr + dA.with_coeffs(np.einsum("ssz->z", dA.coeffs)) * phi.jet(x, 0) * ds["d2"]
    if ds["d3"]:
        corr = corr + B_operator(psi_inv, g, d, n)(P).jet(x, 0) * phi.jet(x, 0) * ds["d3"]
    return float(abs((lhs - base - corr).value))


# -- expansions used in the diagram computation -------------------------------

def _sym_kl(T: jets.Jet) -> jets.Jet:
    """Two-term symmetrization over the last two axes."""
    r = len(T.shape)
    axes = list(range(r))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return T + T.transpose(*axes)


def proof_identities(f: Diffeo, g: Metric, lam, delta, phi: Field, P: Field, x) -> dict:
    """Both-sides residuals of the pullback expansions behind the diagram.

    ``f^*`` below is the natural (push-forward) action and ``ell`` the genuine
    pullback difference ``f^*Gamma - Gamma`` of this package, so the expansions
    for ``f^*`` involve ``ell(f^{-1})`` while those for ``f^{*-1}`` involve
    ``ell(f)``.  Keys:

    * ``density_gradient``: ``nabla_i f^*phi - f^*nabla_i phi - lam L_i f^*phi``
    * ``density_hessian``: ``nabla_j nabla_i f^*phi`` against its expansion
    * ``ricci``: ``Ric(f^*g) - Ric(g)`` against the quadratic expression in ``L``
    * ``symbol_hessian``: ``nabla nabla f^{*-1}P`` against its expansion
    """
    x = np.atleast_1d(np.asarray(x, float))
    lam, delta = _q(lam), _q(delta)
    lf, dl = float(lam), float(delta)
    phi = phi.with_meta(kinds="", weight=lam)
    P = P.with_meta(weight=delta)
    c2, c1, c0 = g.connection(x, 2), g.connection(x, 1), g.connection(x, 0)
    out = {}

    # density expansions with L = ell(f^{-1})
    Lf = ell_field(f.inverse(), g)
    L = Lf.jet(x, 2)
    Ltr = L.with_coeffs(np.einsum("ttjz->jz", L.coeffs))
    dLtr = covariant_derivative(Ltr.truncate(1), "d", 0, c0)        # [j, i] = nabla_j L_i
    Q = push(f, phi)
    dQ = covariant_derivative(Q.jet(x, 2), "", lam, c1)             # order 1
    ddQ = covariant_derivative(dQ, "d", lam, c0)                    # [j, i]
    gphi = nabla(g, phi)
    pg = push(f, gphi.with_meta(kinds="d", weight=lam))
    pgj = pg.jet(x, 1)
    hphi = nabla(g, gphi.with_meta(kinds="d", weight=lam))
    ph = push(f, hphi.with_meta(kinds="dd", weight=lam)).jet(x, 0)
    q0 = Q.jet(x, 0)
    res = dQ.truncate(0) - pgj.truncate(0) - Ltr.truncate(0) * q0 * lf
    out["density_gradient"] = float(np.max(np.abs(res.value)))
    L0, l0, g0 = L.truncate(0), Ltr.truncate(0), pgj.truncate(0)
    rhs = ph + jets.einsum("tji,t->ji", L0, g0)
    s = jets.einsum("j,i->ji", l0, g0)
    rhs = rhs + (s + s.transpose(1, 0)) * lf
    rhs = rhs + (dLtr * lf + jets.einsum("j,i->ji", l0, l0) * (lf * lf)) * q0
    out["density_hessian"] = float(np.max(np.abs((ddQ - rhs).value)))

    # Ricci of the transported metric
    gt = Metric(push(f, g.field), g.signature)
    dRic = gt.curvature(x, 0).ricci - g.curvature(x, 0).ricci
    dL = covariant_derivative(L.truncate(1), "udd", 0, c0)          # [s, i, j, k]
    L1 = Ltr.truncate(1)
    dl1 = covariant_derivative(L1, "d", 0, c0)                       # [j, k]
    rhs = dL.with_coeffs(np.einsum("iijkz->jkz", dL.coeffs)) - dl1
    rhs = rhs - jets.einsum("msj,skm->jk", L0, L0) + jets.einsum("m,mjk->jk", l0, L0)
    out["ricci"] = float(np.max(np.abs((dRic - rhs).value)))

    # symbol expansion: Q = f^{*-1}P = pull(f, P), ell = ell(f)
    M = ell_field(f, g).jet(x, 2)
    Mtr = M.with_coeffs(np.einsum("ttjz->jz", M.coeffs))
    Pq = pull(f, P)
    dPq = covariant_derivative(Pq.jet(x, 2), "uu", delta, c1)        # [j, k, l]
    ddPq = covariant_derivative(dPq, "duu", delta, c0)               # [i, j, k, l]
    gP = nabla(g, P)
    pgP = pull(f, gP.with_meta(kinds="duu", weight=delta)).jet(x, 0)  # [j, k, l]
    hP = nabla(g, gP.with_meta(kinds="duu", weight=delta))
    phP = pull(f, hP.with_meta(kinds="dduu", weight=delta)).jet(x, 0)
    dM = covariant_derivative(M.truncate(1), "udd", 0, c0)          # [i, k, j, t]
    dMtr = covariant_derivative(Mtr.truncate(1), "d", 0, c0)        # [i, j]
    M0, m0 = M.truncate(0), Mtr.truncate(0)
    Q0 = Pq.jet(x, 0)
    dQ0 = dPq.truncate(0)
    rhs = phP
    rhs = rhs - _sym_kl(jets.einsum("kit,jtl->ijkl", M0, pgP))
    rhs = rhs + jets.einsum("uij,ukl->ijkl", M0, pgP)
    rhs = rhs + jets.einsum("i,jkl->ijkl", m0, pgP) * dl
    rhs = rhs - _sym_kl(jets.einsum("ikjt,tl->ijkl", dM, Q0))
    rhs = rhs + jets.einsum("ij,kl->ijkl", dMtr, Q0) * dl
    rhs = rhs - _sym_kl(jets.einsum("kjt,itl->ijkl", M0, dQ0))
    rhs = rhs + jets.einsum("j,ikl->ijkl", m0, dQ0) * dl
    out["symbol_hessian"] = float(np.max(np.abs((ddPq - rhs).value)))
    return out


def deformed_group_law(f: Diffeo, h: Diffeo, g: Metric, lam, mu, symbols: Symbols, n: int, x
                       ) -> float:
    """``|bar(f o h) P - bar f (bar h P)|`` over the three components at ``x``."""
    a = deformed_action(f.compose(h), g, lam, mu, symbols, n)
    b = deformed_action(f, g, lam, mu, deformed_action(h, g, lam, mu, symbols, n), n)
    worst = 0.0
    for u, v in ((a.P2, b.P2), (a.P1, b.P1), (a.P0, b.P0)):
        if u is None and v is None:
            continue
        if u is None or v is None:
            ref = u if u is not None else v
            worst = max(worst, float(np.max(np.abs(np.asarray(ref.jet(x, 0).value)))))
            continue
        worst = max(worst, float(np.max(np.abs(np.asarray((u.jet(x, 0) - v.jet(x, 0)).value)))))
    return worst
