"""Conformal derivations of fixed degree on a truncated grade window.

A degree-``beta`` derivation sends ``L_al`` to ``f_al(D, la) L_{al+beta}``.  The
Leibniz rule ``D_la [x mu y] = [(D_la x) la+mu y] + [x mu (D_la y)]`` on
``(L_x, L_y)`` reads::

    P(x, y, D+la, mu) f_{x+y}(D, la)
        = f_x(-la-mu, la) P(x+beta, y, D, la+mu) + f_y(D+mu, la) P(x, y+beta, D, mu)

Each ``f_al`` is expanded in ``D^p la^q`` (``p <= deg_d``, ``q <= deg_la``) and the
identity is matched coefficient-wise into a homogeneous linear system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .ansatz import WindowAnsatz
from .errors import RegimeMismatch, WindowViolation
from .exactpoly import ZERO, MPoly, RowEchelon, nullspace
from .lca import RATIO_INTEGER, GradedLCA, D, al, la, mu, param_regime

WINDOW_GUARD = 12


def regime(A: GradedLCA) -> str:
    """Case of the derivation classification the concrete ``(a, c)`` falls under."""
    if A.mode.symbolic:
        raise RegimeMismatch("derivations need concrete (a, c); the answer branches on c = 0, a = 0, c/a in Z")
    return param_regime(A.mode)


def special_degree(A: GradedLCA) -> int | None:
    """``d = -c/a`` when it is a nonzero integer (the outer derivation's degree)."""
    if regime(A) != RATIO_INTEGER:
        return None
    return int(-A.mode.c / A.mode.a)


def admissible(x: int, y: int, beta: int, window: int) -> bool:
    grades = (x, y, x + y, x + beta, y + beta, x + y + beta)
    return all(-window <= g <= window for g in grades)


def admissible_pairs(beta: int, window: int) -> list[tuple[int, int]]:
    rng = range(-window, window + 1)
    return [(x, y) for x in rng for y in rng if admissible(x, y, beta, window)]


def _leibniz(A: GradedLCA, fx, fy, fxy, x: int, y: int, beta: int):
    # works for MPoly and UPoly f's alike
    t_lhs = fxy * A.bracket(x, y, D + la, mu)
    t_left = fx.substitute({"D": -la - mu}) * A.bracket(x + beta, y, D, la + mu)
    t_right = fy.substitute({"D": D + mu}) * A.bracket(x, y + beta, D, mu)
    return t_lhs - t_left - t_right


def derivation_residual(
    A: GradedLCA, f: Mapping[int, MPoly], beta: int, x: int, y: int, window: int
) -> MPoly:
    """Leibniz residual on the pair ``(L_x, L_y)``; zero iff the rule holds there."""
    if A.mode.symbolic:
        raise RegimeMismatch("derivation residuals need concrete (a, c)")
    if not admissible(x, y, beta, window):
        raise WindowViolation(f"pair ({x}, {y}) with beta={beta} leaves the window [-{window}, {window}]")
    return _leibniz(A, f[x], f[y], f[x + y], x, y, beta)


def inner_derivation(A: GradedLCA, beta: int, g: MPoly, window: int) -> dict[int, MPoly]:
    """``ad`` of ``g(D) L_beta`` on every in-window grade: ``f_al = g(-la) P(beta, al, D, la)``."""
    if A.mode.symbolic:
        raise RegimeMismatch("inner derivations need concrete (a, c)")
    g.check_alphabet(("D",))
    gl = g.substitute({"D": -la})
    return {x: gl * A.bracket(beta, x, D, la) for x in range(-window, window + 1)}


def is_derivation(A: GradedLCA, f: Mapping[int, MPoly], beta: int, window: int) -> bool:
    return all(
        derivation_residual(A, f, beta, x, y, window).is_zero()
        for x, y in admissible_pairs(beta, window)
    )


@dataclass(frozen=True)
class DerivationAnsatz(WindowAnsatz):
    beta: int = 0


@dataclass
class DerivationClass:
    values: dict[int, MPoly]
    poly: MPoly  # interpolated in al over the central window


@dataclass
class DerivationSpace:
    ansatz: DerivationAnsatz
    regime: str
    n_rows: int
    rank: int
    solution_basis: list[tuple[Fraction, ...]]
    inner_basis: list[tuple[Fraction, ...]]
    inner_generators: list[MPoly]
    central: int
    central_solution_rank: int
    central_inner_rank: int
    representatives: list[DerivationClass] = field(default_factory=list)
    inner_ok: bool = True

    @property
    def solution_dimension(self) -> int:
        return len(self.solution_basis)

    @property
    def quotient_dimension(self) -> int:
        return self.central_solution_rank - self.central_inner_rank

    def central_coords(self) -> list[int]:
        ans = self.ansatz
        return [n for n in range(ans.size) if abs(n // ans.block - ans.window) <= self.central]

    def project(self, v: Sequence[Fraction]) -> dict[int, Fraction]:
        return {n: v[n] for n in self.central_coords() if v[n]}

    def outside_inner_span(self, f: Mapping[int, MPoly]) -> bool:
        """Exact rank test: does ``f`` (on the central window) escape the inner span?"""
        v = self.ansatz.vector(f)
        if v is None:
            return True
        ech = RowEchelon(self.ansatz.size)
        for w in self.inner_basis:
            ech.add(self.project(w))
        return ech.add(self.project(v))


def build_rows(A: GradedLCA, ans: DerivationAnsatz) -> list[dict[int, Fraction]]:
    rows = []
    for x, y in admissible_pairs(ans.beta, ans.window):
        res = _leibniz(A, ans.upoly(x), ans.upoly(y), ans.upoly(x + y), x, y, ans.beta)
        for form in res.constraints(["D", "la", "mu"]).values():
            rows.append({k[0]: v for k, v in form.items()})
    return rows


def interpolate_grades(values: Mapping[int, MPoly]) -> MPoly:
    """Lagrange interpolation in ``al`` of a per-grade table of polynomials."""
    pts = sorted(values)
    out = ZERO
    for g in pts:
        basis = MPoly({}) + 1
        for h in pts:
            if h != g:
                basis = basis * (al - h) / (g - h)
        out = out + basis * values[g]
    return out


def _normalize(poly: MPoly) -> Fraction:
    # scale so the lowest-order term has coefficient 1
    items = poly.items()
    return 1 / items[-1][1] if items else Fraction(1)


def solve_derivation_space(
    A: GradedLCA, beta: int, window: int, deg_d: int = 3, deg_la: int = 3
) -> DerivationSpace:
    reg = regime(A)
    if window < 2 or deg_d < 1 or deg_la < 1:
        raise ValueError("need window >= 2 and degree bounds >= 1")
    if window > WINDOW_GUARD:
        raise WindowViolation(f"window {window} exceeds the guard {WINDOW_GUARD}")
    if abs(beta) > window:
        raise WindowViolation(f"beta={beta} leaves the window")
    ans = DerivationAnsatz(window, deg_d, deg_la, beta)
    rows = build_rows(A, ans)
    ech, basis = nullspace(rows, ans.size)

    inner, gens = [], []
    for r in range(deg_d + 1):
        g = D ** r
        v = ans.vector(inner_derivation(A, beta, g, window))
        if v is None or not any(v):
            continue
        inner.append(v)
        gens.append(g)
    inner_ok = all(_orthogonal(rows, v) for v in inner)

    central = math.ceil(window / 2)
    space = DerivationSpace(ans, reg, len(rows), ech.rank, basis, inner, gens, central, 0, 0, inner_ok=inner_ok)
    e_inner = RowEchelon(ans.size)
    for v in inner:
        e_inner.add(space.project(v))
    e_inner.rref()
    e_all = RowEchelon(ans.size)
    for r in e_inner.pivots.values():
        e_all.add(r)
    e_sol = RowEchelon(ans.size)
    reps = []
    for v in basis:
        pv = space.project(v)
        e_sol.add(pv)
        rem = e_inner.reduce(pv)
        if rem and e_all.add(rem):
            reps.append(rem)
    space.central_solution_rank = e_sol.rank
    space.central_inner_rank = e_inner.rank
    for rem in reps:
        full = [Fraction(0)] * ans.size
        for n, x in rem.items():
            full[n] = x
        vals = {g: p for g, p in ans.assignment(full).items() if abs(g) <= central}
        poly = interpolate_grades(vals)
        s = _normalize(poly)
        space.representatives.append(
            DerivationClass({g: p * s for g, p in vals.items()}, poly * s)
        )
    return space


def _orthogonal(rows: list[dict[int, Fraction]], v: Sequence[Fraction]) -> bool:
    return all(sum(x * v[n] for n, x in r.items()) == 0 for r in rows)


def representative_assignment(space: DerivationSpace, poly: MPoly) -> dict[int, MPoly]:
    """Evaluate a grade-polynomial family on the whole window."""
    return {g: poly.substitute({"al": g}) for g in space.ansatz.grades}
