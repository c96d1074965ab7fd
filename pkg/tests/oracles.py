"""Independent reference computations in sympy.

Nothing here imports the package's algebra: brackets, residuals and mode
formulas are rewritten from their defining identities so the tests compare two
unrelated code paths.  ``to_sympy`` only reads an MPoly's public terms.
"""
from __future__ import annotations

import sympy as sp

a, c, al, be, ga, i, j, k, D, la, mu = sp.symbols("a c al be ga i j k D la mu")
ORDER = (a, c, al, be, ga, i, j, k, D, la, mu)


def to_sympy(p) -> sp.Expr:
    out = sp.Integer(0)
    for e, v in p.terms.items():
        term = sp.Rational(v.numerator, v.denominator)
        for s, n in zip(ORDER, e):
            term *= s ** n
        out += term
    return sp.expand(out)


def parse(text: str) -> sp.Expr:
    return sp.expand(sp.sympify(text.replace("^", "**"), locals={s.name: s for s in ORDER}))


def cw_bracket(x, y, d, l, av=a, cv=c) -> sp.Expr:
    return (av * x + cv) * d + (av * x + av * y + 2 * cv) * l


def skew(P) -> sp.Expr:
    return sp.expand(P(al, be, D, la) + P(be, al, D, -la - D))


def jacobi(P) -> sp.Expr:
    t1 = P(be, ga, D + la, mu) * P(al, be + ga, D, la)
    t2 = P(al, be, -la - mu, la) * P(al + be, ga, D, la + mu)
    t3 = P(al, ga, D + mu, la) * P(be, al + ga, D, mu)
    return sp.expand(t1 - t2 - t3)


def mode_bracket(P, m, n) -> tuple[sp.Expr, list[int]]:
    """``[x_(m), y_(n)]`` from the k-product expansion, with drops ``k + r`` per term."""
    expr = sp.expand(P(al, be, D, la))
    poly = sp.Poly(expr, la, D)
    total = sp.Integer(0)
    drops = []
    for (kk, r), coef in poly.terms():
        kprod = coef * sp.factorial(kk)
        p = m + n - kk
        total += sp.binomial(m, kk) * kprod * (-1) ** r * sp.ff(p, r)
        drops.append(kk + r)
    return sp.expand(sp.expand_func(total)), drops


def cw_mode_structure(shift: int = -1) -> sp.Expr:
    S, _ = mode_bracket(cw_bracket, i - shift, j - shift)
    return sp.expand(S)


def lie_jacobi(S) -> sp.Expr:
    def s(x, y, p, q):
        return S.subs({al: x, be: y, i: p, j: q}, simultaneous=True)

    return sp.expand(
        s(be, ga, j, k) * s(al, be + ga, i, j + k)
        - s(al, be, i, j) * s(al + be, ga, i + j, k)
        - s(al, ga, i, k) * s(be, al + ga, j, i + k)
    )


def module_residual(P, f, x, y) -> sp.Expr:
    """``f(x, y, ...)``: ``f(g, d, l)`` is the action of grade ``g``."""
    lhs = f(y, D + la, mu) * f(x, D, la) - f(x, D + mu, la) * f(y, D, mu)
    return sp.expand(lhs - P(x, y, -la - mu, la) * f(x + y, D, la + mu))


def leibniz(P, f, x, y, beta) -> sp.Expr:
    """Derivation residual; ``f(g, d, l)`` is the image coefficient of ``L_g``."""
    lhs = P(x, y, D + la, mu) * f(x + y, D, la)
    rhs = f(x, -la - mu, la) * P(x + beta, y, D, la + mu) + f(y, D + mu, la) * P(x, y + beta, D, mu)
    return sp.expand(lhs - rhs)


def structure_identities(f):
    """The two coefficient identities behind Jacobi for ``P = f D + (f + swap f) la``."""
    g = lambda x, y: f(x, y) + f(y, x)
    ff = f(al, ga) * f(be, al + ga) - f(be, ga) * f(al, be + ga)
    fg = f(be, al) * g(al + be, ga) - f(be, ga) * g(al, be + ga)
    return sp.expand(ff), sp.expand(fg)


def leibniz_system_rank(av, cv, beta, window, deg_d, deg_la) -> tuple[int, int]:
    """(unknowns, rank) of the truncated derivation system, built from scratch in sympy."""
    P = lambda x, y, d, l: cw_bracket(x, y, d, l, av, cv)
    grades = range(-window, window + 1)
    unknowns = {}
    for g in grades:
        for p in range(deg_d + 1):
            for q in range(deg_la + 1):
                unknowns[(g, p, q)] = sp.Symbol(f"u_{g}_{p}_{q}")

    def f(g, d, l):
        return sum(unknowns[(g, p, q)] * d ** p * l ** q for p in range(deg_d + 1) for q in range(deg_la + 1))

    eqs = []
    for x in grades:
        for y in grades:
            if all(-window <= t <= window for t in (x + y, x + beta, y + beta, x + y + beta)):
                res = leibniz(P, f, x, y, beta)
                eqs.extend(sp.Poly(res, D, la, mu).coeffs())
    syms = list(unknowns.values())
    M, _ = sp.linear_eq_to_matrix(eqs, syms)
    return len(syms), M.rank()
