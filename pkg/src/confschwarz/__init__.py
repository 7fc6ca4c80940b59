"""Conformally invariant Schwarzian-type cocycles and equivariant quantization on jets.

Submodules:
    jets: truncated multivariate Taylor arithmetic with an order budget.
    expr: the expression language used by scenario files.
    geometry: metrics with their curvature.
    actions: diffeomorphisms and their action on tensor densities and operators.
    cocycles: the conformal cocycles and their checks.
    quantization: conformally equivariant quantization of second order symbols.
    flatmodel: the flat conformal group and its Lie algebra.
    harness: scenario files and checks behind the ``verify`` CLI.
"""

from . import actions, cocycles, expr, flatmodel, geometry, jets, quantization

__version__ = "0.1.0"

__all__ = ["actions", "cocycles", "expr", "flatmodel", "geometry", "jets", "quantization",
           "__version__"]
