"""Scenario files: a TOML document describing inputs and the checks to run.

Layout (every table except ``[scenario]`` is optional)::

    [scenario]
    name = "flat-kernel"
    dimension = 3
    signature = [2, 1]          # default [n, 0]
    order = 6                   # jet order budget K
    seed = 0

    [metric]
    catalog = "flat"            # flat | sphere | hyperbolic | random | conformally-flat
    # components = [["1", "0"], ["0", "exp(2*x1)"]]   # expression matrix instead
    # factor = "exp(x1*x2)"     # for conformally-flat: factor * eta
    # params = { a = 0.5 }

    [[weights]]
    lambda = "1/4"
    mu = "2/3"

    [probes]
    points = [[0.1, 0.0, -0.1]] # explicit points, or
    count = 3                   # seeded random points in [-radius, radius]^n
    radius = 0.2

    [[diffeos]]
    name = "f"
    catalog = "special-conformal"   # see DIFFEO_CATALOG
    params = { b = [0.1, 0.0, 0.05] }
    # components = ["x1 + x1^2/2", "x2", "x3"]   # expression map
    # compose = ["sc", "rot"]                    # earlier entries, applied right to left

    [[generators]]
    kind = "special-conformal"
    params = { b = [1, 0, 0] }

    [symbols]
    poly_degree = 3
    # P2 = [["1", "x1"], ["x1", "x2^2"]]        # fixed expression symbol

    [checks]
    names = ["cocycle.A", "kernel.A"]

    [tolerances]
    "kernel.A" = 1e-9

    [audit]
    A = { c = 0.5 }            # override constants (mutation testing)
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import tomli

from .. import expr as E
from ..flatmodel import MAP_KINDS, GENERATOR_KINDS

__all__ = ["ScenarioError", "Scenario", "DiffeoSpec", "load_scenario", "parse_scenario",
           "METRIC_CATALOG", "DIFFEO_CATALOG", "DEFAULT_ORDER", "DEFAULT_SEED"]

DEFAULT_ORDER = 6
DEFAULT_SEED = 0
METRIC_CATALOG = ("flat", "sphere", "hyperbolic", "random", "conformally-flat")
DIFFEO_CATALOG = MAP_KINDS + ("identity", "linear", "polynomial-perturbation", "random")


class ScenarioError(ValueError):
    """Invalid scenario; ``where`` names the offending key."""

    def __init__(self, message: str, where: str = "", excluded=None):
        self.where = where
        self.excluded = excluded
        super().__init__(f"{where}: {message}" if where else message)


@dataclass
class DiffeoSpec:
    name: str
    catalog: str | None = None
    params: dict = field(default_factory=dict)
    components: list | None = None
    inverse: list | None = None
    compose: list | None = None


@dataclass
class Scenario:
    name: str
    n: int
    signature: tuple[int, int]
    order: int = DEFAULT_ORDER
    seed: int = DEFAULT_SEED
    metric: dict = field(default_factory=lambda: {"catalog": "flat"})
    weights: list[tuple[Fraction, Fraction]] = field(default_factory=list)
    points: np.ndarray | None = None
    probe_count: int = 1
    probe_radius: float = 0.2
    diffeos: list[DiffeoSpec] = field(default_factory=list)
    generators: list[dict] = field(default_factory=list)
    symbols: dict = field(default_factory=dict)
    checks: list[str] = field(default_factory=list)
    tolerances: dict[str, float] = field(default_factory=dict)
    audit: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    parsed: dict = field(default_factory=dict, repr=False)
    source: str = ""

    def digest(self) -> str:
        """SHA-256 of the source text together with the effective seed and order."""
        h = hashlib.sha256(self.source.encode())
        h.update(f"|seed={self.seed}|order={self.order}".encode())
        return h.hexdigest()

    def probes(self) -> np.ndarray:
        if self.points is not None:
            return self.points
        rng = np.random.default_rng([self.seed, 0x5eed])
        return rng.uniform(-self.probe_radius, self.probe_radius, (self.probe_count, self.n))


def _rational(v, where: str) -> Fraction:
    try:
        if isinstance(v, float):
            return Fraction(str(v))
        return Fraction(v)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ScenarioError(f"expected a rational number, got {v!r}", where) from None


def _parse_expr(src, n: int, where: str, params) -> E.ExprAst:
    if not isinstance(src, (str, int, float)):
        raise ScenarioError(f"expected an expression string, got {src!r}", where)
    try:
        return E.parse(str(src), n, params)
    except E.ExprSyntaxError as exc:
        raise ScenarioError(f"malformed expression {src!r}: {exc} (byte offset {exc.offset})",
                            where) from None
    except E.ExprError as exc:
        raise ScenarioError(f"bad expression {src!r}: {exc}", where) from None


def _matrix(rows, n: int, where: str, params):
    if not isinstance(rows, list) or len(rows) != n or any(
            not isinstance(r, list) or len(r) != n for r in rows):
        raise ScenarioError(f"expected an {n}x{n} matrix of expressions", where)
    return [[_parse_expr(v, n, f"{where}[{i}][{j}]", params) for j, v in enumerate(r)]
            for i, r in enumerate(rows)]


def _vector(items, n: int, where: str, params):
    if not isinstance(items, list) or len(items) != n:
        raise ScenarioError(f"expected {n} expressions", where)
    return [_parse_expr(v, n, f"{where}[{i}]", params) for i, v in enumerate(items)]


def parse_scenario(text: str, overrides: dict | None = None) -> Scenario:
    """Validate a scenario document; ``overrides`` may set ``seed`` and ``order``."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError(f"not a valid scenario document: {exc}") from None
    from .checks import REGISTRY, resonance_conflicts

    known = {"scenario", "metric", "weights", "probes", "diffeos", "generators", "symbols",
             "checks", "tolerances", "audit"}
    for key in doc:
        if key not in known:
            raise ScenarioError(f"unknown table {key!r}", key)
    head = doc.get("scenario", {})
    if "dimension" not in head:
        raise ScenarioError("missing dimension", "scenario.dimension")
    n = head["dimension"]
    if not isinstance(n, int) or n < 1:
        raise ScenarioError("dimension must be a positive integer", "scenario.dimension")
    sig = head.get("signature", [n, 0])
    if (not isinstance(sig, list) or len(sig) != 2 or sum(sig) != n
            or any(not isinstance(v, int) or v < 0 for v in sig)):
        raise ScenarioError(f"signature must be [p, q] with p + q = {n}", "scenario.signature")
    s = Scenario(name=str(head.get("name", "scenario")), n=n, signature=(sig[0], sig[1]),
                 source=text)
    s.order = int(head.get("order", DEFAULT_ORDER))
    s.seed = int(head.get("seed", DEFAULT_SEED))
    if overrides:
        if overrides.get("seed") is not None:
            s.seed = int(overrides["seed"])
        if overrides.get("order") is not None:
            s.order = int(overrides["order"])
    if s.order < 1:
        raise ScenarioError("order must be positive", "scenario.order")

    metric = dict(doc.get("metric", {"catalog": "flat"}))
    params = metric.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError("params must be a table", "metric.params")
    s.params = {k: (_rational(v, f"metric.params.{k}") if isinstance(v, (int, str)) else float(v))
                for k, v in params.items()}
    pnames = set(s.params)
    if "components" in metric:
        s.parsed["metric"] = _matrix(metric["components"], n, "metric.components", pnames)
    else:
        cat = metric.get("catalog", "flat")
        if cat not in METRIC_CATALOG:
            raise ScenarioError(f"unknown metric {cat!r}; choose from {METRIC_CATALOG}",
                                "metric.catalog")
        if cat in ("sphere", "hyperbolic") and s.signature[1] != 0:
            raise ScenarioError(f"{cat} metric needs a Riemannian signature", "metric.catalog")
        if cat == "conformally-flat":
            s.parsed["factor"] = _parse_expr(metric.get("factor", "1"), n, "metric.factor", pnames)
    s.metric = metric

    if not isinstance(doc.get("weights", []), list):
        raise ScenarioError("use [[weights]] entries", "weights")
    for i, w in enumerate(doc.get("weights", [])):
        where = f"weights[{i}]"
        if "lambda" not in w or "mu" not in w:
            raise ScenarioError("needs lambda and mu", where)
        s.weights.append((_rational(w["lambda"], where + ".lambda"),
                          _rational(w["mu"], where + ".mu")))

    probes = doc.get("probes", {})
    if "points" in probes:
        pts = np.asarray(probes["points"], float)
        if pts.ndim != 2 or pts.shape[1] != n:
            raise ScenarioError(f"points must be a list of length-{n} lists", "probes.points")
        s.points = pts
    s.probe_count = int(probes.get("count", 1))
    s.probe_radius = float(probes.get("radius", 0.2))
    if s.probe_count < 1:
        raise ScenarioError("count must be positive", "probes.count")

    names = []
    for i, d in enumerate(doc.get("diffeos", [])):
        where = f"diffeos[{i}]"
        spec = DiffeoSpec(name=str(d.get("name", f"d{i}")), catalog=d.get("catalog"),
                          params=dict(d.get("params", {})))
        if "components" in d:
            s.parsed[where] = _vector(d["components"], n, where + ".components", pnames)
            spec.components = d["components"]
            if "inverse" in d:
                s.parsed[where + ".inverse"] = _vector(d["inverse"], n, where + ".inverse", pnames)
                spec.inverse = d["inverse"]
        elif "compose" in d:
            spec.compose = list(d["compose"])
            for part in spec.compose:
                if part not in names:
                    raise ScenarioError(f"compose refers to unknown diffeo {part!r}", where)
        elif spec.catalog not in DIFFEO_CATALOG:
            raise ScenarioError(f"unknown diffeo catalog {spec.catalog!r}", where + ".catalog")
        elif spec.catalog == "linear":
            M = np.asarray(spec.params.get("matrix", []), float)
            if M.shape != (n, n) or abs(np.linalg.det(M)) < 1e-12:
                raise ScenarioError(f"linear needs an invertible {n}x{n} matrix",
                                    where + ".params.matrix")
        names.append(spec.name)
        s.diffeos.append(spec)

    for i, gspec in enumerate(doc.get("generators", [])):
        if gspec.get("kind") not in GENERATOR_KINDS:
            raise ScenarioError(f"unknown generator kind {gspec.get('kind')!r}",
                                f"generators[{i}].kind")
        s.generators.append(dict(gspec))

    sym = dict(doc.get("symbols", {}))
    if "P2" in sym:
        s.parsed["P2"] = _matrix(sym["P2"], n, "symbols.P2", pnames)
    s.symbols = sym

    checks = doc.get("checks", {}).get("names", [])
    if isinstance(checks, str):
        checks = [checks]
    for c in checks:
        if c not in REGISTRY:
            raise ScenarioError(f"unknown check {c!r} (see --list-checks)", "checks.names")
    s.checks = list(checks)
    for k, v in doc.get("tolerances", {}).items():
        if k not in REGISTRY:
            raise ScenarioError(f"tolerance for unknown check {k!r}", "tolerances")
        s.tolerances[k] = float(v)
    s.audit = dict(doc.get("audit", {}))
    for fam in s.audit:
        if fam not in ("A", "B"):
            raise ScenarioError("audit overrides exist for A and B only", f"audit.{fam}")

    for c in s.checks:
        if not REGISTRY[c].dims(n):
            raise ScenarioError(f"check {c!r} requires {REGISTRY[c].dim_text}", "checks.names")
    conflicts = resonance_conflicts(s)
    if conflicts:
        name, lam, mu, hit = conflicts[0]
        raise ScenarioError(
            f"check {name!r} is undefined for (lambda, mu) = ({lam}, {mu}): "
            f"delta = {mu - lam} is the excluded value {hit}", "weights", excluded=hit)
    return s


def load_scenario(path, seed: int | None = None, order: int | None = None) -> Scenario:
    """Read and validate a scenario file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}", str(p)) from None
    return parse_scenario(text, {"seed": seed, "order": order})


def describe(s: Scenario) -> dict:
    """Plain data for the report header."""
    return {
        "name": s.name,
        "dimension": s.n,
        "signature": list(s.signature),
        "order": s.order,
        "seed": s.seed,
        "weights": [[str(a), str(b)] for a, b in s.weights],
        "metric": json.loads(json.dumps(s.metric, default=str)),
        "digest": s.digest(),
    }
