"""Exact tools for Z-graded Lie conformal algebras of CW(a, c) type.

The core is a dense-exponent polynomial ring over Q (:mod:`lieconf.exactpoly`);
everything else reduces algebraic identities to coefficient matching in it.
"""
from .exactpoly import MPoly, parse_poly
from .lca import GradedLCA, ParamMode, cw, jacobi_residual, skew_residual, virasoro

__all__ = ["MPoly", "parse_poly", "GradedLCA", "ParamMode", "cw", "virasoro", "skew_residual", "jacobi_residual"]
__version__ = "0.1.0"
