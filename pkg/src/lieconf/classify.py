"""Bounded-degree classification of structure polynomials ``f(al, be)``.

For ``P = f*D + (f + f^swap)*la`` the Jacobi identity reduces to two identities in
``f`` over all integer triples ``(al, be, ga)``::

    ff:  f(al,ga) f(be,al+ga) = f(be,ga) f(al,be+ga)
    fg:  f(be,al) g(al+be,ga) = f(be,ga) g(al,be+ga),   g = f + f^swap

With ``f = sum u_pq al^p be^q`` each identity yields one quadratic form in the
``u_pq`` per monomial in ``al, be, ga``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .ansatz import QuadForm, UPoly, eval_form, form_str
from .errors import AlphabetViolation, DegreeLimit
from .exactpoly import ZERO, MPoly, lcm_denominator, to_rational, var
from .lca import a, al, be, build_graded_lca, c, ga, jacobi_residual, skew_residual, D, la

DEFAULT_GUARD = 4
DEFAULT_GRID = tuple(Fraction(n) for n in range(-2, 3))
IDENTITIES = ("ff", "fg")


def swap(f: MPoly) -> MPoly:
    return f.substitute({"al": be, "be": al})


def presentation_from_f(f: MPoly) -> MPoly:
    return f * D + (f + swap(f)) * la


def unknown_shapes(deg: int) -> list[tuple[int, int]]:
    """``(p, q)`` with ``p + q <= deg``, lexicographic."""
    return [(p, q) for p in range(deg + 1) for q in range(deg + 1 - p)]


@dataclass(frozen=True)
class StructureAnsatz:
    degree: int

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return unknown_shapes(self.degree)

    @property
    def labels(self) -> list[str]:
        return [f"u_{p}_{q}" for p, q in self.shapes]

    def index(self, p: int, q: int) -> int:
        return self.shapes.index((p, q))

    def f(self, x: MPoly, y: MPoly) -> UPoly:
        return UPoly.linear({n: x ** p * y ** q for n, (p, q) in enumerate(self.shapes)})

    def g(self, x: MPoly, y: MPoly) -> UPoly:
        return self.f(x, y) + self.f(y, x)


def identity_polys(F, G):
    """Both identities as differences, for callables ``F(x, y)`` and ``G(x, y)``."""
    ff = F(al, ga) * F(be, al + ga) - F(be, ga) * F(al, be + ga)
    fg = F(be, al) * G(al + be, ga) - F(be, ga) * G(al, be + ga)
    return {"ff": ff, "fg": fg}


def identity_residuals(f: MPoly) -> dict[str, MPoly]:
    """The ff and fg identities evaluated on a concrete ``f`` (MPolys in al, be, ga, a, c)."""

    def F(x, y):
        return f.substitute({"al": x, "be": y})

    def G(x, y):
        return F(x, y) + F(y, x)

    return identity_polys(F, G)


def identity_sides(f: MPoly, point: Sequence[int]) -> dict[str, tuple[Fraction, Fraction]]:
    """Left and right sides of the ff and fg identities at an integer point."""
    x, y, z = (to_rational(v) for v in point)

    def F(p, q):
        return f.substitute({"al": p, "be": q}).as_constant()

    def G(p, q):
        return F(p, q) + F(q, p)

    return {
        "ff": (F(x, z) * F(y, x + z), F(y, z) * F(x, y + z)),
        "fg": (F(y, x) * G(x + y, z), F(y, z) * G(x, y + z)),
    }


@dataclass(frozen=True)
class Constraint:
    identity: str
    monomial: tuple[int, int, int]  # exponents of al, be, ga
    form: QuadForm


@dataclass
class ConstraintSet:
    ansatz: StructureAnsatz
    constraints: list[Constraint]

    @property
    def labels(self) -> list[str]:
        return self.ansatz.labels

    def __len__(self):
        return len(self.constraints)

    def satisfied_by(self, values: Sequence[Fraction]) -> bool:
        return all(eval_form(k.form, values) == 0 for k in self.constraints)

    def restricted(self, identity: str, allowed: set[int]) -> dict[tuple[int, int, int], QuadForm]:
        """Constraints of one identity with every unknown outside ``allowed`` set to zero."""
        out = {}
        for k in self.constraints:
            if k.identity != identity:
                continue
            q = {key: v for key, v in k.form.items() if set(key) <= allowed}
            if q:
                out[k.monomial] = q
        return out

    def render(self) -> list[dict]:
        return [
            {
                "identity": k.identity,
                "monomial": str(al ** k.monomial[0] * be ** k.monomial[1] * ga ** k.monomial[2]),
                "constraint": form_str(k.form, self.labels),
            }
            for k in self.constraints
        ]


def _guard(deg: int, guard: int) -> None:
    if deg < 0:
        raise ValueError("degree bound must be non-negative")
    if deg > guard:
        raise DegreeLimit(f"degree {deg} exceeds the guard {guard}")


def generate_structure_constraints(deg: int, guard: int = DEFAULT_GUARD) -> ConstraintSet:
    _guard(deg, guard)
    ans = StructureAnsatz(deg)
    polys = identity_polys(ans.f, ans.g)
    out = []
    for name in IDENTITIES:
        forms = polys[name].constraints(["al", "be", "ga"])
        for mono in sorted(forms, reverse=True):
            out.append(Constraint(name, mono, forms[mono]))
    return ConstraintSet(ans, out)


# -- candidate verification --------------------------------------------------------
@dataclass
class StructureVerdict:
    f: MPoly
    skew: MPoly
    jacobi: MPoly
    witnesses: dict[str, tuple[int, ...]] = field(default_factory=dict)

    @property
    def skew_ok(self) -> bool:
        return self.skew.is_zero()

    @property
    def jacobi_ok(self) -> bool:
        return self.jacobi.is_zero()


def _first_witness(p: MPoly, syms: Sequence[str], grid: Sequence[int]) -> tuple[int, ...] | None:
    for point in itertools.product(grid, repeat=len(syms)):
        if p.substitute(dict(zip(syms, point))):
            return point
    return None


def verify_structure_candidate(f: MPoly, grid: Sequence[int] = range(-2, 3)) -> StructureVerdict:
    """Build ``P`` from ``f`` and check both axioms; witnesses are integer grade points."""
    f.check_alphabet(("a", "c", "al", "be"))
    A = build_graded_lca(presentation_from_f(f))
    verdict = StructureVerdict(f, skew_residual(A), jacobi_residual(A))
    grid = list(grid)
    if not verdict.skew_ok:
        w = _first_witness(verdict.skew, ("al", "be"), grid)
        if w is not None:
            verdict.witnesses["skew"] = w
    if not verdict.jacobi_ok:
        w = _first_witness(verdict.jacobi, ("al", "be", "ga"), grid)
        if w is not None:
            verdict.witnesses["jacobi"] = w
    return verdict


# -- bounded solving ---------------------------------------------------------------
@dataclass
class StructureSolution:
    degree: int
    grid: tuple[Fraction, ...]
    n_constraints: int
    families: list[MPoly]
    survivors: list[tuple[Fraction, ...]]
    assignments_total: int
    nodes_visited: int
    stages: list[dict]
    outside_family: list[tuple[Fraction, ...]]

    @property
    def complete(self) -> bool:
        return not self.outside_family and all(s.get("verified") for s in self.stages)


def _expect(key_pairs: list[tuple[int, int]], coef: int) -> QuadForm:
    out: QuadForm = {}
    for x, y in key_pairs:
        k = tuple(sorted((x, y)))
        out[k] = out.get(k, 0) + coef
    return out


def staged_elimination(cs: ConstraintSet) -> list[dict]:
    """Leading-term certificates that force ``f = u_1_0*al + u_0_0``.

    * mixed: for every box ``p <= m, q <= n`` with ``n >= 1``, the ff coefficient of
      ``al^(m+n) be^s ga^r`` is exactly ``u_m_r * u_s_n``; the two leading
      polynomials are nonzero, so no f depends on ``be``.
    * pure_alpha: for ``f`` in Q[al] of degree ``m >= 2`` the fg coefficient of
      ``al be^(2m-1)`` is ``m * u_m_0^2``.
    * pure_beta: for ``f`` in Q[be] of degree ``n >= 1`` the ff coefficient of
      ``al ga^(2n-1)`` is ``n * u_0_n^2``.
    """
    ans = cs.ansatz
    deg = ans.degree
    shapes = ans.shapes
    idx = {s: n for n, s in enumerate(shapes)}
    names = ans.labels
    stages = []

    for m in range(deg + 1):
        for n in range(1, deg + 1):
            box = {idx[(p, q)] for (p, q) in shapes if p <= m and q <= n}
            lead_a = [(r, idx[(m, r)]) for r in range(n + 1) if (m, r) in idx]
            lead_b = [(s, idx[(s, n)]) for s in range(m + 1) if (s, n) in idx]
            if not lead_a or not lead_b:
                continue
            got = {mono: q for mono, q in cs.restricted("ff", box).items() if mono[0] == m + n}
            want = {}
            for r, ur in lead_a:
                for s, us in lead_b:
                    want[(m + n, s, r)] = _expect([(ur, us)], 1)
            stages.append({
                "stage": "mixed",
                "alpha_degree": m,
                "beta_degree": n,
                "monomials": len(want),
                "verified": got == want,
            })

    for m in range(2, deg + 1):
        pure = {idx[(p, 0)] for p in range(m + 1)}
        mono = (1, 2 * m - 1, 0)
        got = cs.restricted("fg", pure).get(mono, {})
        want = _expect([(idx[(m, 0)], idx[(m, 0)])], m)
        stages.append({
            "stage": "pure_alpha",
            "degree": m,
            "monomial": str(al * be ** (2 * m - 1)),
            "constraint": form_str(got, names),
            "verified": got == want,
        })

    for n in range(1, deg + 1):
        pure = {idx[(0, q)] for q in range(n + 1)}
        mono = (1, 0, 2 * n - 1)
        got = cs.restricted("ff", pure).get(mono, {})
        want = _expect([(idx[(0, n)], idx[(0, n)])], n)
        stages.append({
            "stage": "pure_beta",
            "degree": n,
            "monomial": str(al * ga ** (2 * n - 1)),
            "constraint": form_str(got, names),
            "verified": got == want,
        })

    family = affine_family(deg)
    res = identity_residuals(family)
    stages.append({
        "stage": "family",
        "f": str(family),
        "verified": all(r.is_zero() for r in res.values()),
    })
    return stages


def affine_family(deg: int) -> MPoly:
    """The surviving family with ``a, c`` as its free parameters."""
    return c if deg == 0 else a * al + c


def _in_family(values: Sequence[Fraction], ans: StructureAnsatz) -> bool:
    keep = {(0, 0), (1, 0)}
    return all(v == 0 for v, s in zip(values, ans.shapes) if s not in keep)


def exhaustive_survivors(cs: ConstraintSet, grid: Sequence[Fraction]) -> tuple[list[tuple[Fraction, ...]], int]:
    """Every grid assignment satisfying all constraints, by pruned backtracking.

    Unknowns are assigned in lexicographic ``(p, q)`` order; a constraint is tested
    as soon as its last unknown is set.  Forms are homogeneous quadratics, so the
    grid is scaled to integers.
    """
    n = len(cs.ansatz.shapes)
    grid = [to_rational(g) for g in grid]
    scale = lcm_denominator(grid)
    ints = [int(g * scale) for g in grid]
    buckets: list[list[list[tuple[int, int, int]]]] = [[] for _ in range(n)]
    for k in cs.constraints:
        if any(len(key) != 2 for key in k.form):
            raise ValueError("structure constraints must be homogeneous quadratic")
        den = lcm_denominator(k.form.values())
        terms = [(key[0], key[1], int(v * den)) for key, v in k.form.items()]
        last = max(max(key) for key in k.form)
        buckets[last].append(terms)
    vals = [0] * n
    found: list[tuple[int, ...]] = []
    visited = 0

    def descend(d: int):
        nonlocal visited
        for v in ints:
            visited += 1
            vals[d] = v
            if all(sum(w * vals[x] * vals[y] for x, y, w in t) == 0 for t in buckets[d]):
                if d + 1 == n:
                    found.append(tuple(vals))
                else:
                    descend(d + 1)

    if n:
        descend(0)
    return [tuple(Fraction(x, scale) for x in s) for s in found], visited


def solve_structure_bounded(
    deg: int, grid: Sequence = DEFAULT_GRID, guard: int = DEFAULT_GUARD
) -> StructureSolution:
    """Staged symbolic certificates plus an exhaustive grid falsifier."""
    _guard(deg, guard)
    grid = tuple(sorted({to_rational(g) for g in grid}))
    if not grid:
        raise ValueError("grid must be non-empty")
    cs = generate_structure_constraints(deg, guard)
    stages = staged_elimination(cs)
    survivors, visited = exhaustive_survivors(cs, grid)
    outside = [s for s in survivors if not _in_family(s, cs.ansatz)]
    return StructureSolution(
        degree=deg,
        grid=grid,
        n_constraints=len(cs),
        families=[affine_family(deg)],
        survivors=survivors,
        assignments_total=len(grid) ** len(cs.ansatz.shapes),
        nodes_visited=visited,
        stages=stages,
        outside_family=outside,
    )


def family_member(deg: int, values: Sequence[Fraction]) -> MPoly:
    """Rebuild ``f`` from a coefficient vector of the ansatz."""
    return sum(
        (v * al ** p * be ** q for v, (p, q) in zip(values, unknown_shapes(deg))),
        ZERO,
    )
