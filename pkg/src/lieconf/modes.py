"""The mode Lie algebra of a graded presentation.

``[L_{al,i}, L_{be,j}] = S(al, be, i, j) L_{al+be, i+j}``.  S is obtained either from
the closed form for CW(a, c) or from the k-product table via

    [x_(m), y_(n)] = sum_k binom(m, k) (x_(k) y)_(m+n-k),   (D X)_(m) = -m X_(m-1),

with modes relabelled ``i = m + x`` for an integer shift ``x``.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

from .errors import NotIndexAdditive, PresetOnly, RegimeMismatch
from .exactpoly import ONE, ZERO, MPoly, lcm_denominator, var
from .lca import GradedLCA, ParamMode, a, al, be, c, ga, is_cw_preset, k_products

i, j, k = var("i"), var("j"), var("k")
SHIFT_RANGE = range(-3, 4)

LOOP_WITT = "LOOP_WITT"
BLOCK_TYPE = "BLOCK_TYPE"
NEW_TYPE_W11 = "NEW_TYPE_W11"
GENERIC = "GENERIC"


@dataclass(frozen=True)
class ModeAlgebra:
    S: MPoly
    shift: int = -1
    # (grade, index) labels of every bracket term before collection
    targets: tuple[tuple[MPoly, MPoly], ...] = field(default=(), compare=False)


def closed_form_polynomial() -> MPoly:
    return a * (be * (i + 1) - al * (j + 1)) + c * (i - j)


def mode_algebra_closed_form(A: GradedLCA) -> ModeAlgebra:
    if not is_cw_preset(A):
        raise PresetOnly(f"{A.name or A.P} is not the CW(a, c) preset")
    return ModeAlgebra(A.mode.apply(closed_form_polynomial()), -1)


def binomial_poly(m: MPoly, r: int) -> MPoly:
    """``m (m-1) ... (m-r+1) / r!`` as a polynomial."""
    return falling(m, r) / math.factorial(r)


def falling(m: MPoly, r: int) -> MPoly:
    out = ONE
    for t in range(r):
        out = out * (m - t)
    return out


def _bracket_terms(A: GradedLCA, m: MPoly, n: MPoly):
    """``(coefficient, total mode drop k + r)`` for each term of ``[L_al(m), L_be(n)]``."""
    out = []
    for kk, entry in enumerate(k_products(A)):
        for (r,), coef in sorted(entry.coefficients(["D"]).items()):
            if not coef:
                continue
            # (D^r X)_(p) = (-1)^r p(p-1)...(p-r+1) X_(p-r)
            term = binomial_poly(m, kk) * coef * falling(m + n - kk, r) * (-1) ** r
            out.append((term, kk + r))
    return out


def mode_algebra_from_kproducts(A: GradedLCA) -> ModeAlgebra:
    """Derive S from the k-products and find the index-additive shift in {-3..3}."""
    valid = []
    for x in SHIFT_RANGE:
        m, n = i - x, j - x
        terms = _bracket_terms(A, m, n)
        # target mode (m + n - drop) relabels to m + n - drop + x; it must equal i + j
        targets = tuple((al + be, m + n - drop + x) for _, drop in terms)
        if all(t == i + j for _, t in targets):
            S = sum((t for t, _ in terms), ZERO)
            valid.append(ModeAlgebra(S, x, targets))
    if not valid:
        raise NotIndexAdditive(f"no shift in {SHIFT_RANGE.start}..{SHIFT_RANGE.stop - 1} works")
    if len(valid) > 1:
        # only the zero bracket admits several shifts; keep the printed convention
        return next(v for v in valid if v.shift == -1)
    return valid[0]


def substitute_modes(S: MPoly, x, y, p, q) -> MPoly:
    return S.substitute({"al": x, "be": y, "i": p, "j": q})


def lie_algebra_residuals(M: ModeAlgebra) -> tuple[MPoly, MPoly]:
    S = M.S
    skew = S + substitute_modes(S, be, al, j, i)
    jac = (
        substitute_modes(S, be, ga, j, k) * substitute_modes(S, al, be + ga, i, j + k)
        - substitute_modes(S, al, be, i, j) * substitute_modes(S, al + be, ga, i + j, k)
        - substitute_modes(S, al, ga, i, k) * substitute_modes(S, be, al + ga, j, i + k)
    )
    return skew, jac


def numeric_jacobi_failures(M: ModeAlgebra, grid=range(-2, 3), params=((1, 0), (0, 1), (1, 1))):
    """Brute-force Jacobi over ``grid^6``; returns the failing ``((a, c), point)`` pairs.

    S is affine in ``(a, c)`` so the Jacobi expression is a quadratic form in them;
    three parameter points in general position determine it.
    """
    failures = []
    for pa, pc in params:
        S = M.S.substitute({"a": pa, "c": pc})
        S.check_alphabet(("al", "be", "i", "j"))
        # homogeneous quadratic in S, so an integer rescaling keeps zeros
        scale = lcm_denominator(S.terms.values())
        # exponent layout: a c al be ga i j k D la mu
        terms = [(int(v * scale), e[2], e[3], e[5], e[6]) for e, v in S.terms.items()]

        @functools.lru_cache(maxsize=None)
        def ev(x, y, p, q):
            return sum(v * x ** ex * y ** ey * p ** ep * q ** eq for v, ex, ey, ep, eq in terms)

        for x, y, z, p, q, r in itertools.product(grid, repeat=6):
            lhs = ev(y, z, q, r) * ev(x, y + z, p, q + r)
            rhs = ev(x, y, p, q) * ev(x + y, z, p + q, r) + ev(x, z, p, r) * ev(y, x + z, q, p + r)
            if lhs != rhs:
                failures.append(((pa, pc), (x, y, z, p, q, r)))
    return failures


def recognize_special_case(mode: ParamMode) -> str:
    if mode.symbolic:
        raise RegimeMismatch("recognition needs concrete (a, c)")
    return {
        (0, 1): LOOP_WITT,
        (1, 0): BLOCK_TYPE,
        (1, 1): NEW_TYPE_W11,
    }.get((mode.a, mode.c), GENERIC)
