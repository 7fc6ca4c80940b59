"""The fixed check registry.

Every check maps to one invariant of a library module and returns a measured
residual at one probe point (for ``sense="min"`` checks, a quantity that must
stay above the tolerance).  Random inputs come from a generator seeded by the
scenario seed, the check name and the probe index, so results do not depend on
which other checks run or in which order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .. import expr as E
from .. import jets
from ..actions import (Diffeo, act_operator, connection_field, ell_field, flow_diffeo,
                       lie_connection, pull, pull_operator, pulled_connection, push)
from ..cocycles import (A_operator, A_terms, B_operator, B_surface_operator, eval_A, eval_B,
                        eval_B_surface, eval_C, eval_a_inf, eval_b_inf, flow_derivative,
                        op_first, op_yamabe, osgood_stowe, projective_symbol)
from ..fields import Field, random_density, random_symbol
from ..flatmodel import (GENERATOR_KINDS, MAP_KINDS, all_generators, compose_maps, conformal_map,
                         conformal_generator, flat_metric, is_conformal, projective_map)
from ..geometry import (Metric, covderiv_symbol, einstein_divergence, metric_compatibility,
                        verify_rescaling_identities)
from ..quantization import (Symbols, conformal_pair, deformed_action, deformed_group_law,
                            proof_identities, quantize_op, resonant_value, verify_q2_rescaling)
from ..sampling import random_conformal_map, random_diffeo, random_factor, random_metric

__all__ = ["CheckSpec", "Context", "REGISTRY", "register", "resonance_conflicts",
           "dimension_conflicts"]

FLOW_STEP = 2.5e-4


@dataclass(frozen=True)
class CheckSpec:
    name: str
    module: str
    invariant: str
    tol: float
    func: Callable[["Context"], float]
    uses_weights: bool = False
    dims: Callable[[int], bool] = lambda n: True
    dim_text: str = ""
    resonance: str | None = None  # coefficient family for resonant_value
    sense: str = "max"

    def passes(self, measured: float, tol: float) -> bool:
        if not np.isfinite(measured):
            return False
        return measured >= tol if self.sense == "min" else measured <= tol


REGISTRY: dict[str, CheckSpec] = {}


def register(name: str, module: str, invariant: str, tol: float, **kw):
    def deco(fn):
        REGISTRY[name] = CheckSpec(name, module, invariant, tol, fn, **kw)
        return fn

    return deco


def resonance_conflicts(s) -> list[tuple[str, Fraction, Fraction, Fraction]]:
    out = []
    for name in s.checks:
        spec = REGISTRY[name]
        if not spec.uses_weights or spec.resonance is None or not spec.dims(s.n):
            continue
        for lam, mu in s.weights:
            hit = resonant_value(spec.resonance, s.n, lam, mu)
            if hit is not None:
                out.append((name, lam, mu, hit))
    return out


def dimension_conflicts(s) -> list[str]:
    return [n for n in s.checks if not REGISTRY[n].dims(s.n)]


# -- context ----------------------------------------------------------------------

class Context:
    """Inputs for one (check, probe, weight) evaluation."""

    def __init__(self, scenario, check: str, probe_index: int, x, weight_index: int | None):
        self.s = scenario
        self.n = scenario.n
        self.signature = scenario.signature
        self.x = np.asarray(x, float)
        self.probe_index = probe_index
        key = [scenario.seed, zlib.crc32(check.encode()), probe_index,
               -1 if weight_index is None else weight_index]
        self.rng = np.random.default_rng([k & 0xFFFFFFFF for k in key])
        if weight_index is None:
            d = scenario.symbols.get("delta")
            self.delta = Fraction(str(d)) if d is not None else Fraction(1, 3)
            self.lam, self.mu = Fraction(0), self.delta
        else:
            self.lam, self.mu = scenario.weights[weight_index]
            self.delta = self.mu - self.lam
        self._metric = None

    # inputs
    def metric(self) -> Metric:
        if self._metric is None:
            self._metric = build_metric(self.s)
        return self._metric

    def flat(self) -> Metric:
        return flat_metric(*self.signature)

    def curved(self) -> Metric:
        """A non-flat metric: the scenario one unless it is flat."""
        g = self.metric()
        return random_metric(self.n, self.rng, self.signature) if g.flat else g

    def symbol(self, degree: int = 2, weight=None) -> Field:
        w = self.delta if weight is None else weight
        if degree == 2 and "P2" in self.s.parsed:
            return E.expr_field(self.s.parsed["P2"], self.s.params, "uu", w, "P2")
        return random_symbol(self.n, degree, w, self.rng, int(self.s.symbols.get("poly_degree", 3)))

    def density(self, weight=None) -> Field:
        return random_density(self.n, self.lam if weight is None else weight, self.rng)

    def factor(self) -> Field:
        return random_factor(self.n, self.rng)

    def diffeo(self, i: int) -> Diffeo:
        ds = self.s.diffeos
        if i < len(ds):
            return build_diffeo(self.s, i, self.rng)
        return random_diffeo(self.n, self.rng)

    def conformal(self):
        """A cataloged flat conformal map: scenario entries in turn, else a random composite."""
        conf = [i for i, d in enumerate(self.s.diffeos) if _is_catalog(self.s, i)]
        if conf:
            i = conf[self.probe_index % len(conf)]
            return build_diffeo(self.s, i, self.rng)
        return random_conformal_map(self.signature, self.rng).diffeo

    def generators(self):
        if self.s.generators:
            return [conformal_generator(g["kind"], g.get("params", {}), self.signature)
                    for g in self.s.generators]
        return all_generators(self.signature)

    def consts(self, family: str):
        o = self.s.audit.get(family)
        return None if o is None else {k: float(v) for k, v in o.items()}

    def A_const(self):
        o = self.consts("A")
        return None if o is None else o.get("c")


def _is_catalog(s, i) -> bool:
    d = s.diffeos[i]
    if d.compose:
        names = [x.name for x in s.diffeos]
        return all(_is_catalog(s, names.index(p)) for p in d.compose)
    return d.catalog in MAP_KINDS


def build_metric(s) -> Metric:
    spec = s.metric
    n = s.n
    if "metric" in s.parsed:
        return Metric(E.expr_field(s.parsed["metric"], s.params, "dd", 0, "metric"), s.signature,
                      label="expression")
    cat = spec.get("catalog", "flat")
    if cat == "flat":
        return flat_metric(*s.signature)
    if cat == "random":
        rng = np.random.default_rng([s.seed, 0xA11CE])
        return random_metric(n, rng, s.signature)
    if cat == "conformally-flat":
        F = E.expr_field(s.parsed["factor"], s.params, "", 0, "factor")
        eta = flat_metric(*s.signature)(np.zeros(n))
        return Metric(Field(lambda x, k: jets.einsum("ij,->ij", jets.constant(eta, F.jet(x, k)),
                                                     F.jet(x, k)), "dd"), s.signature,
                      label="conformally-flat")
    sign = 1.0 if cat == "sphere" else -1.0

    def func(X):
        r2 = sum((X[i] * X[i] for i in range(1, n)), X[0] * X[0])
        w = 4.0 / ((1.0 + sign * r2) * (1.0 + sign * r2))
        return [[w if i == j else X[0] * 0.0 for j in range(n)] for i in range(n)]

    return Metric.from_function(func, s.signature, label=cat)


def build_diffeo(s, i: int, rng) -> Diffeo:
    d = s.diffeos[i]
    n = s.n
    if d.compose:
        names = [x.name for x in s.diffeos]
        parts = [build_diffeo(s, names.index(p), rng) for p in d.compose]
        out = parts[0]
        for p in parts[1:]:
            out = out.compose(p)
        return out
    if d.components is not None:
        fwd = s.parsed[f"diffeos[{i}]"]
        inv = s.parsed.get(f"diffeos[{i}].inverse")

        def mk(nodes):
            return lambda X: [E._eval(node, X, s.params, E._JET_LIB) for node in nodes]

        return Diffeo(mk(fwd), mk(inv) if inv else None, label=d.name)
    if d.catalog == "identity":
        return Diffeo.identity(n)
    if d.catalog in ("random", "polynomial-perturbation"):
        scale = float(d.params.get("scale", 0.12))
        return random_diffeo(n, np.random.default_rng([s.seed, 0xD1FF, i]), scale=scale)
    if d.catalog == "linear":
        M = np.asarray(d.params["matrix"], float)
        v = np.asarray(d.params.get("v", np.zeros(n)), float)
        Minv = np.linalg.inv(M)
        return Diffeo(lambda X: [sum(M[a, b] * X[b] for b in range(n)) + v[a] for a in range(n)],
                      lambda Y: [sum(Minv[a, b] * (Y[b] - v[b]) for b in range(n))
                                 for a in range(n)], label=d.name)
    return conformal_map(d.catalog, d.params, s.signature).diffeo


# -- residual helpers -------------------------------------------------------------

def _arr(v) -> np.ndarray:
    if isinstance(v, jets.Jet):
        v = v.value
    return np.atleast_1d(np.asarray(v, float))


def _absres(a, b=0.0) -> float:
    return float(np.max(np.abs(_arr(a) - _arr(b))))


def _relres(a, b) -> float:
    a, b = _arr(a), _arr(b)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def _n_at_least(k):
    return lambda n: n >= k


# -- geometry ---------------------------------------------------------------------

@register("geometry.metric_compatibility", "geometry", "nabla g = 0", 1e-10)
def _(c: Context):
    return metric_compatibility(c.curved(), c.x)


@register("geometry.bianchi", "geometry", "divergence of the Einstein tensor vanishes", 1e-6,
          dims=_n_at_least(3), dim_text="n >= 3")
def _(c: Context):
    return einstein_divergence(c.curved(), c.x)


@register("geometry.scalar_derivative", "geometry",
          "covariant derivative of a weight-0 function is the plain gradient", 1e-12)
def _(c: Context):
    g = c.curved()
    phi = c.symbol(0, 0)
    d, _ = covderiv_symbol(g, phi, c.x, 1)
    return _absres(d, phi.jet(c.x, 1).gradient().truncate(0))


@register("geometry.rescaling_identities", "geometry",
          "identities for the rescaled connection and its derived quantities", 1e-7)
def _(c: Context):
    r = verify_rescaling_identities(c.curved(), c.factor(), c.symbol(2), c.x, f=c.diffeo(0))
    return max(r.values())


# -- actions ----------------------------------------------------------------------

@register("actions.ell_cocycle", "actions", "ell(f o h) = h^* ell(f) + ell(h)", 1e-8)
def _(c: Context):
    g, f, h = c.metric(), c.diffeo(0), c.diffeo(1)
    lhs = ell_field(f.compose(h), g).jet(c.x, 0)
    rhs = pull(h, ell_field(f, g)).jet(c.x, 0) + ell_field(h, g).jet(c.x, 0)
    return _relres(lhs, rhs)


@register("actions.ell_naturality", "actions",
          "ell for psi_* g equals psi_* of ell for g at psi^-1 f psi", 1e-8)
def _(c: Context):
    g, f, psi = c.curved(), c.diffeo(0), c.diffeo(1)
    gt = Metric(push(psi, g.field))
    lhs = ell_field(f, gt).jet(c.x, 0)
    rhs = push(psi, ell_field(psi.inverse().compose(f).compose(psi), g)).jet(c.x, 0)
    return _relres(lhs, rhs)


@register("actions.ell_flow", "actions", "d/dt ell(flow_t) at 0 equals +L_X nabla", 1e-5)
def _(c: Context):
    g = c.curved()
    worst = 0.0
    for gen in c.generators():
        X = gen.field
        plus = ell_field(flow_diffeo(X, FLOW_STEP), g).jet(c.x, 0)
        minus = ell_field(flow_diffeo(X, -FLOW_STEP), g).jet(c.x, 0)
        worst = max(worst, _absres((_arr(plus) - _arr(minus)) / (2 * FLOW_STEP),
                                   lie_connection(X, g, c.x)))
    return worst


@register("actions.group_law", "actions", "pullback of symbols is a right action", 1e-10)
def _(c: Context):
    f, h = c.diffeo(0), c.diffeo(1)
    P = c.symbol(2)
    return _relres(pull(f.compose(h), P).jet(c.x, 0), pull(h, pull(f, P)).jet(c.x, 0))


# -- cocycles ---------------------------------------------------------------------

@register("cocycle.A", "cocycles", "A(f o h) = h^* A(f) + A(h)", 1e-8)
def _(c: Context):
    g, f, h, P, n = c.metric(), c.diffeo(0), c.diffeo(1), c.symbol(2), c.n
    lhs = eval_A(f.compose(h), g, c.delta, P, c.x, c.A_const()).values
    rhs = pull_operator(h, A_operator(f, g, c.delta, n, c.A_const()))(P).jet(c.x, 0).value \
        + eval_A(h, g, c.delta, P, c.x, c.A_const()).values
    return _relres(lhs, rhs)


@register("cocycle.B", "cocycles", "B(f o h) = h^* B(f) + B(h)", 1e-8, dims=_n_at_least(3),
          dim_text="n >= 3")
def _(c: Context):
    g, f, h, P, n = c.metric(), c.diffeo(0), c.diffeo(1), c.symbol(2), c.n
    k = c.consts("B")
    lhs = eval_B(f.compose(h), g, c.delta, P, c.x, k).values
    rhs = pull_operator(h, B_operator(f, g, c.delta, n, k))(P).jet(c.x, 0).value \
        + eval_B(h, g, c.delta, P, c.x, k).values
    return _relres(lhs, rhs)


@register("cocycle.C", "cocycles", "C(f o h) = h^* C(f) + C(h) with the (2,1)-tensor action",
          1e-8)
def _(c: Context):
    g, f, h = c.metric(), c.diffeo(0), c.diffeo(1)
    Cf = Field(lambda y, k: projective_symbol(pulled_connection(f, g).jet(y, k))
               - projective_symbol(connection_field(g).jet(y, k)), "udd", 0)
    lhs = eval_C(f.compose(h), g, c.x).values
    rhs = pull(h, Cf).jet(c.x, 0).value + eval_C(h, g, c.x).values
    return _relres(lhs, rhs)


@register("rescaling.A", "cocycles", "A computed with F g equals A computed with g", 1e-8)
def _(c: Context):
    g, f, P, F = c.curved(), c.diffeo(0), c.symbol(2), c.factor()
    k = c.A_const()
    return _relres(eval_A(f, g, c.delta, P, c.x, k).values,
                   eval_A(f, g.rescaled(F), c.delta, P, c.x, k).values)


@register("rescaling.B", "cocycles", "B computed with F g equals B computed with g", 1e-8,
          dims=_n_at_least(3), dim_text="n >= 3")
def _(c: Context):
    g, f, P, F = c.curved(), c.diffeo(0), c.symbol(2), c.factor()
    k = c.consts("B")
    return _relres(eval_B(f, g, c.delta, P, c.x, k).values,
                   eval_B(f, g.rescaled(F), c.delta, P, c.x, k).values)


@register("kernel.A", "cocycles", "A vanishes on flat conformal maps", 1e-8)
def _(c: Context):
    return _absres(eval_A(c.conformal(), c.flat(), c.delta, c.symbol(2), c.x, c.A_const()).values)


@register("kernel.B", "cocycles", "B vanishes on flat conformal maps", 1e-8, dims=_n_at_least(3),
          dim_text="n >= 3")
def _(c: Context):
    return _absres(eval_B(c.conformal(), c.flat(), c.delta, c.symbol(2), c.x,
                          c.consts("B")).values)


@register("kernel.a_inf", "cocycles", "a(X) vanishes on conformal generators", 1e-8)
def _(c: Context):
    P = c.symbol(2)
    return max(_absres(eval_a_inf(gen.field, c.flat(), c.delta, P, c.x, c.A_const()).values)
               for gen in c.generators())


@register("kernel.b_inf", "cocycles", "b(X) vanishes on conformal generators", 1e-8,
          dims=_n_at_least(3), dim_text="n >= 3")
def _(c: Context):
    P = c.symbol(2)
    return max(_absres(eval_b_inf(gen.field, c.flat(), c.delta, P, c.x,
                                  consts=c.consts("B")).values)
               for gen in c.generators())


@register("flow.A", "cocycles", "central difference of A along flows matches a(X)", 1e-5)
def _(c: Context):
    g, P = c.curved(), c.symbol(2)
    return max(_absres(flow_derivative("A", gen.field, g, c.delta, P, c.x, FLOW_STEP),
                       eval_a_inf(gen.field, g, c.delta, P, c.x).values)
               for gen in c.generators())


@register("flow.B", "cocycles", "central difference of B along flows matches b(X)", 1e-5,
          dims=_n_at_least(3), dim_text="n >= 3")
def _(c: Context):
    g, P = c.curved(), c.symbol(2)
    return max(_absres(flow_derivative("B", gen.field, g, c.delta, P, c.x, FLOW_STEP),
                       eval_b_inf(gen.field, g, c.delta, P, c.x).values)
               for gen in c.generators())


@register("coboundary.A", "cocycles", "at delta = 2/n, A is the coboundary of the first-order "
          "operator", 1e-9)
def _(c: Context):
    n = c.n
    d = Fraction(2, n)
    g, f = c.curved(), c.diffeo(0)
    P = c.symbol(2, d)
    T = op_first(g)
    cob = pull(f, T(push(f, P))).jet(c.x, 0).value - T(P).jet(c.x, 0).value
    return _absres(eval_A(f, g, d, P, c.x).values, cob)


@register("coboundary.B_yamabe", "cocycles",
          "at delta = (n+2)/(2n), B is the coboundary of the Yamabe operator", 1e-8,
          dims=_n_at_least(3), dim_text="n >= 3")
def _(c: Context):
    n = c.n
    d = Fraction(n + 2, 2 * n)
    g, f = c.curved(), c.diffeo(0)
    P = c.symbol(2, d)
    Y = op_yamabe(g, n)
    cob = pull(f, Y(push(f, P))).jet(c.x, 0).value - Y(P).jet(c.x, 0).value
    return _absres(eval_B(f, g, d, P, c.x).values, cob)


def _conj_setup(c: Context):
    g, f, psi, F = c.curved(), c.diffeo(0), c.diffeo(1), c.factor()
    gt = conformal_pair(g, psi, F)
    return g, gt, f, psi


@register("conjugation.A", "cocycles",
          "A for F^-1 psi_* g at f equals psi_* of A for g at psi^-1 f psi", 1e-8)
def _(c: Context):
    g, gt, f, psi = _conj_setup(c)
    P = c.symbol(2)
    conj = psi.inverse().compose(f).compose(psi)
    rhs = act_operator(psi, A_operator(conj, g, c.delta, c.n))(P).jet(c.x, 0).value
    return _relres(eval_A(f, gt, c.delta, P, c.x).values, rhs)


@register("conjugation.B", "cocycles",
          "B for F^-1 psi_* g at f equals psi_* of B for g at psi^-1 f psi", 1e-8,
          dims=_n_at_least(3), dim_text="n >= 3")
def _(c: Context):
    g, gt, f, psi = _conj_setup(c)
    P = c.symbol(2)
    conj = psi.inverse().compose(f).compose(psi)
    rhs = act_operator(psi, B_operator(conj, g, c.delta, c.n))(P).jet(c.x, 0).value
    return _relres(eval_B(f, gt, c.delta, P, c.x).values, rhs)


@register("conjugation.corollary", "cocycles",
          "A for F^-1 psi_* g at psi equals -A for g at psi^-1", 1e-8)
def _(c: Context):
    g, gt, _, psi = _conj_setup(c)
    P = c.symbol(2)
    return _relres(eval_A(psi, gt, c.delta, P, c.x).values,
                   -eval_A(psi.inverse(), g, c.delta, P, c.x).values)


@register("nontrivial.A", "cocycles",
          "the ell-part of A is nonzero for a non-conformal map (must exceed tolerance)", 1e-3,
          sense="min")
def _(c: Context):
    n = c.n
    f = Diffeo(lambda X: [X[0] + X[0] * X[0] * 0.5] + [X[i] for i in range(1, n)],
               label="quadratic")
    return _absres(A_terms(f, c.flat(), c.delta, c.symbol(2), c.x)["ell"])


@register("projective.C", "cocycles", "C vanishes on projective maps of the flat chart", 1e-8)
def _(c: Context):
    n = c.n
    M = np.eye(n + 1) + c.rng.uniform(-0.1, 0.1, (n + 1, n + 1))
    return _absres(eval_C(projective_map(M), c.flat(), c.x).values)


def _surface_data(c: Context):
    """``g = F^{-1} psi^* g0`` with a holomorphic-type ``psi`` and a random positive ``F``."""
    a, b = c.rng.uniform(-0.2, 0.2, 2)
    psi = Diffeo(lambda X: [X[0] + a * (X[0] ** 2 - X[1] ** 2) - b * 2 * X[0] * X[1],
                            X[1] + 2 * a * X[0] * X[1] + b * (X[0] ** 2 - X[1] ** 2)],
                 label="psi")
    F = c.factor()
    pg = pull(psi, flat_metric(2, 0).field)
    g = Metric(Field(lambda y, k: pg.jet(y, k) / F.jet(y, k), "dd"), (2, 0))
    return psi, F, pg, g


_is2 = lambda n: n == 2  # noqa: E731


@register("surface.osgood_stowe", "cocycles", "S(F = exp(2 x1)) = diag(-1/2, 1/2) on the flat "
          "plane", 1e-10, dims=_is2, dim_text="n = 2")
def _(c: Context):
    F = Field.from_function(lambda X: jets.exp(X[0] * 2.0), "", 0, "exp(2x1)")
    return _absres(osgood_stowe(F, flat_metric(2, 0), c.x).values, np.diag([-0.5, 0.5]))


@register("surface.cocycle", "cocycles", "the surface operator satisfies the cocycle law", 1e-8,
          dims=_is2, dim_text="n = 2")
def _(c: Context):
    _, F, _, g = _surface_data(c)
    f, h, P = c.diffeo(0), c.diffeo(1), c.symbol(2)
    lhs = eval_B_surface(f.compose(h), g, c.delta, P, F, c.x).values
    rhs = pull_operator(h, B_surface_operator(f, g, c.delta, F))(P).jet(c.x, 0).value \
        + eval_B_surface(h, g, c.delta, P, F, c.x).values
    return _relres(lhs, rhs)


@register("surface.rescaling", "cocycles", "the surface operator is unchanged by g -> G g", 1e-8,
          dims=_is2, dim_text="n = 2")
def _(c: Context):
    _, F, _, g = _surface_data(c)
    f, P, G = c.diffeo(0), c.symbol(2), c.factor()
    Ft = Field(lambda y, k: F.jet(y, k) / G.jet(y, k), "")
    return _relres(eval_B_surface(f, g, c.delta, P, F, c.x).values,
                   eval_B_surface(f, g.rescaled(G), c.delta, P, Ft, c.x).values)


@register("surface.kernel", "cocycles", "the surface operator vanishes on flat conformal maps",
          1e-8, dims=_is2, dim_text="n = 2")
def _(c: Context):
    one = Field.constant(1.0)
    return _absres(eval_B_surface(c.conformal(), c.flat(), c.delta, c.symbol(2), one,
                                  c.x).values)


# -- quantization -----------------------------------------------------------------

def _full(c: Context) -> Symbols:
    return Symbols(c.symbol(2), c.symbol(1), c.symbol(0))


@register("quant.linearity", "quantization", "Q is linear in the symbol and in the density",
          1e-10, uses_weights=True, dims=_n_at_least(3), dim_text="n >= 3",
          resonance="q")
def _(c: Context):
    g = c.curved()
    S1, S2 = _full(c), _full(c)
    phi, psi = c.density(), c.density()
    a, b = 0.7, -1.3

    def comb(u, v):
        if u is None:
            return None
        return Field(lambda x, k: u.jet(x, k) * a + v.jet(x, k) * b, u.kinds, u.weight)

    S = Symbols(comb(S1.P2, S2.P2), comb(S1.P1, S2.P1), comb(S1.P0, S2.P0))
    Q = lambda SS: quantize_op(g, c.lam, c.mu, SS, c.n)  # noqa: E731
    x = c.x
    r1 = _relres(Q(S)(phi).jet(x, 0), Q(S1)(phi).jet(x, 0) * a + Q(S2)(phi).jet(x, 0) * b)
    mix = Field(lambda y, k: phi.jet(y, k) * a + psi.jet(y, k) * b, "", c.lam)
    r2 = _relres(Q(S1)(mix).jet(x, 0), Q(S1)(phi).jet(x, 0) * a + Q(S1)(psi).jet(x, 0) * b)
    return max(r1, r2)


@register("quant.principal_symbol", "quantization",
          "the second-order coefficient of Q(P) is P", 1e-10, uses_weights=True,
          dims=_n_at_least(3), dim_text="n >= 3", resonance="q2")
def _(c: Context):
    g, P, n, x0 = c.curved(), c.symbol(2), c.n, c.x
    Q = quantize_op(g, c.lam, c.mu, Symbols(P), n)
    got = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            phi = Field.from_function(lambda X, a=a, b=b: (X[a] - x0[a]) * (X[b] - x0[b]),
                                      "", c.lam)
            got[a, b] = float(Q(phi).jet(x0, 0).value) / 2.0
    return _absres(got, P.jet(x0, 0).value)


@register("quant.equivariance", "quantization",
          "on the flat model Q intertwines the symbol and operator actions of conformal maps",
          1e-8, uses_weights=True, dims=_n_at_least(3), dim_text="n >= 3",
          resonance="q")
def _(c: Context):
    flat, f = c.flat(), c.conformal()
    S, phi = _full(c), c.density()
    Q = lambda SS: quantize_op(flat, c.lam, c.mu, SS, c.n)  # noqa: E731
    lhs = Q(Symbols(push(f, S.P2), push(f, S.P1), push(f, S.P0)))(phi).jet(c.x, 0)
    rhs = push(f, Q(S)(pull(f, phi))).jet(c.x, 0)
    return _relres(lhs, rhs)


@register("quant.q1_conformal_class", "quantization",
          "the first-order quantization depends only on the conformal class", 1e-9,
          uses_weights=True, resonance="q1")
def _(c: Context):
    g, F = c.curved(), c.factor()
    S = Symbols(None, c.symbol(1), c.symbol(0))
    phi = c.density()
    return _relres(quantize_op(g, c.lam, c.mu, S)(phi).jet(c.x, 0),
                   quantize_op(g.rescaled(F), c.lam, c.mu, S)(phi).jet(c.x, 0))


@register("quant.q2_rescaling", "quantization", "Q2 computed with F g equals Q2 with g", 1e-8,
          uses_weights=True, dims=_n_at_least(3), dim_text="n >= 3", resonance="q2")
def _(c: Context):
    g, F, P, phi = c.curved(), c.factor(), c.symbol(2), c.density()
    return _relres(quantize_op(g, c.lam, c.mu, Symbols(P), c.n)(phi).jet(c.x, 0),
                   quantize_op(g.rescaled(F), c.lam, c.mu, Symbols(P), c.n)(phi).jet(c.x, 0))


@register("quant.metric_change", "quantization",
          "Q2 for F^-1 psi_* g differs from Q2 for g by the d1, d2, d3 cocycle terms", 1e-8,
          uses_weights=True, dims=_n_at_least(3), dim_text="n >= 3", resonance="d")
def _(c: Context):
    g, psi, F = c.curved(), c.diffeo(0), c.factor()
    return verify_q2_rescaling(g, psi, F, c.lam, c.mu, c.symbol(2), c.density(), c.x)


@register("quant.diagram", "quantization",
          "Q of the deformed action equals the operator action of Q", 1e-8, uses_weights=True,
          dims=_n_at_least(3), dim_text="n >= 3", resonance="deformed")
def _(c: Context):
    g, f = c.metric(), c.diffeo(0)
    S, phi = _full(c), c.density()
    T = deformed_action(f, g, c.lam, c.mu, S, c.n)
    lhs = quantize_op(g, c.lam, c.mu, T, c.n)(phi).jet(c.x, 0)
    rhs = push(f, quantize_op(g, c.lam, c.mu, S, c.n)(pull(f, phi))).jet(c.x, 0)
    return _relres(lhs, rhs)


@register("quant.deformed_group_law", "quantization",
          "the deformed action is a group action", 1e-7, uses_weights=True,
          dims=_n_at_least(3), dim_text="n >= 3", resonance="deformed")
def _(c: Context):
    return deformed_group_law(c.diffeo(0), c.diffeo(1), c.metric(), c.lam, c.mu, _full(c), c.n,
                              c.x)


@register("quant.trivial_deformation", "quantization",
          "at (lambda, mu) = (0, 1) the deformed action is the plain symbol action", 1e-10,
          dims=_n_at_least(3), dim_text="n >= 3")
def _(c: Context):
    g, f, S = c.metric(), c.diffeo(0), _full(c)
    lam, mu = Fraction(0), Fraction(1)
    S = Symbols(S.P2.with_meta(weight=1), S.P1.with_meta(weight=1), S.P0.with_meta(weight=1))
    T = deformed_action(f, g, lam, mu, S, c.n)
    return max(_absres(T.P2.jet(c.x, 0), push(f, S.P2).jet(c.x, 0)),
               _absres(T.P1.jet(c.x, 0), push(f, S.P1).jet(c.x, 0)),
               _absres(T.P0.jet(c.x, 0), push(f, S.P0).jet(c.x, 0)))


@register("quant.proof_identities", "quantization",
          "pullback expansions of nabla, nabla nabla and Ricci", 1e-8, uses_weights=True)
def _(c: Context):
    r = proof_identities(c.diffeo(0), c.curved(), c.lam, c.delta, c.density(), c.symbol(2), c.x)
    return max(r.values())


@register("quant.surface_invariance", "quantization",
          "the surface quantization for F^-1 psi^* g0 equals the flat one for psi^* g0", 1e-8,
          uses_weights=True, dims=_is2, dim_text="n = 2", resonance="surface")
def _(c: Context):
    psi, F, pg, g = _surface_data(c)
    S, phi = _full(c), c.density()
    one = Field.constant(1.0)
    a = quantize_op(g, c.lam, c.mu, S, 2, surface_F=F)(phi).jet(c.x, 0)
    b = quantize_op(Metric(pg, (2, 0)), c.lam, c.mu, S, 2, surface_F=one)(phi).jet(c.x, 0)
    return _relres(a, b)


# -- flat model -------------------------------------------------------------------

@register("flat.closure", "flatmodel", "composites of cataloged maps are conformal", 1e-9)
def _(c: Context):
    m = compose_maps(random_conformal_map(c.signature, c.rng),
                     random_conformal_map(c.signature, c.rng))
    r = is_conformal(m.diffeo, c.flat(), [c.x])
    return r.worst_residual if all(F > 0 for F in r.factors) else float("inf")


@register("flat.generator_flow", "flatmodel",
          "short-time flows of generators are conformal with factor 1 + O(t)", 1e-8)
def _(c: Context):
    worst = 0.0
    for gen in c.generators():
        r = is_conformal(flow_diffeo(gen.field, FLOW_STEP), c.flat(), [c.x])
        drift = max(0.0, abs(r.factors[0] - 1.0) - 10 * FLOW_STEP)
        worst = max(worst, r.worst_residual, drift)
    return worst


# -- jets -------------------------------------------------------------------------

@register("jets.finite_difference", "jets",
          "first and second jet coefficients match central differences", 1e-5)
def _(c: Context):
    from ..fields import random_polynomial
    n = c.n
    p = random_polynomial(n, 3, c.rng, 0.5)
    fn = lambda X: jets.sin(p(X)) + jets.exp(p(X) * 0.5)  # noqa: E731
    j = jets.jet_lift(fn, c.x, 2)
    fl = lambda y: float(_arr(jets.jet_lift(fn, y, 0).value)[0])  # noqa: E731
    h = 1e-4
    worst = 0.0
    for i in range(n):
        e = np.eye(n)[i] * h
        fd = (fl(c.x + e) - fl(c.x - e)) / (2 * h)
        a = [0] * n
        a[i] = 1
        worst = max(worst, abs(fd - float(jets.jet_derivative(j, a))) / max(1.0, abs(fd)))
        fd2 = (fl(c.x + e) - 2 * fl(c.x) + fl(c.x - e)) / h ** 2
        a[i] = 2
        worst = max(worst, abs(fd2 - float(jets.jet_derivative(j, a))) / max(1.0, abs(fd2)))
    return worst
