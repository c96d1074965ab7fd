"""Rank-one conformal modules ``M = C[D] v`` over a graded presentation.

``L_al la v = f_al(D, la) v``.  On the grade pair ``(x, y)`` the module axiom reads ::

    f_y(D+la, mu) f_x(D, la) - f_x(D+mu, la) f_y(D, mu) = P(x, y, -la-mu, la) f_{x+y}(D, la+mu)

and for CW(a, c) the bracket factor is ``(a y + c) la - (a x + c) mu``.

The classifier never attacks the full quadratic system head on when ``a c != 0``.
It solves ``f_0`` from the ``(0, 0)`` identity, then each ``f_be`` from the
``(0, be)`` identity (linear once ``f_0`` is fixed), and only then checks the
remaining pairs on the few surviving unknowns.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .ansatz import QuadForm, Step, UPoly, WindowAnsatz, solve_staged
from .errors import RegimeMismatch, WindowViolation
from .exactpoly import ONE, ZERO, MPoly, RowEchelon, nullspace, to_rational
from .lca import (
    A_ZERO,
    ABELIAN,
    C_ZERO,
    GradedLCA,
    D,
    is_cw_preset,
    la,
    module_residual_from,
    mu,
    multiplicative_scalars,
    param_regime,
    virasoro,
)

WINDOW_GUARD = 6
PARAM_NAMES = ("d", "e", "g", "h", "p", "q", "r", "s")


def param_grid(numerators: Sequence[int] = range(-2, 3), denominators: Sequence[int] = (1, 2)) -> tuple[Fraction, ...]:
    return tuple(sorted({Fraction(n, d) for n in numerators for d in denominators}))


DEFAULT_GRID = param_grid()


# -- residuals ---------------------------------------------------------------------
def window_pairs(window: int) -> list[tuple[int, int]]:
    rng = range(-window, window + 1)
    return [(x, y) for x in rng for y in rng if -window <= x + y <= window]


def rank1_residual(A: GradedLCA, f: Mapping[int, MPoly], x: int, y: int) -> MPoly:
    """Module-axiom residual on ``(x, y)`` for the per-grade action table ``f``."""
    if A.mode.symbolic:
        raise RegimeMismatch("rank-one residuals need concrete (a, c)")
    for g in (x, y, x + y):
        if g not in f:
            raise WindowViolation(f"grade {g} is outside the action table")
    return module_residual_from(A, f[x], f[y], f[x + y], x, y)


def is_rank1_module(A: GradedLCA, f: Mapping[int, MPoly]) -> bool:
    window = max(abs(g) for g in f)
    if any(g not in f for g in range(-window, window + 1)):
        raise WindowViolation("the action table must cover a symmetric window")
    return all(rank1_residual(A, f, x, y).is_zero() for x, y in window_pairs(window))


def virasoro_module_residual(aprime, bprime, action: MPoly | None = None) -> MPoly:
    """Residual of ``L la v = (D + a' la + b') v`` over ``[L la L] = (D + 2 la) L``.

    ``action`` replaces the default action polynomial (for perturbation tests).
    """
    f = action if action is not None else D + to_rational(aprime) * la + to_rational(bprime)
    f.check_alphabet(("D", "la"))
    return module_residual_from(virasoro(), f, f, f, 0, 0)


@dataclass(frozen=True)
class ModuleAnsatz(WindowAnsatz):
    """Window ansatz with an optional multiplicative scalar layer ``t_g``."""

    scalars: Mapping[int, Fraction] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.scalars is not None:
            t = multiplicative_scalars(self.scalars)
            missing = [g for g in self.grades if g not in t]
            if missing:
                raise WindowViolation(f"scalar layer misses grades {missing}")
            object.__setattr__(self, "scalars", t)

    def upoly(self, g: int) -> UPoly:
        u = super().upoly(g)
        return u if self.scalars is None else u * self.scalars[g]

    def action(self, v: Sequence[Fraction]) -> dict[int, MPoly]:
        f = self.assignment(v)
        if self.scalars is not None:
            f = {g: p * self.scalars[g] for g, p in f.items()}
        return f


# -- affine families in a single grade ---------------------------------------------
@dataclass
class AffineFamily:
    """``base + sum_k names[k] * generators[k]`` for free rationals ``names[k]``."""

    base: MPoly
    generators: list[MPoly]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.names:
            self.names = PARAM_NAMES[: len(self.generators)]

    def member(self, values: Sequence[Fraction]) -> MPoly:
        return sum((g * v for g, v in zip(self.generators, values)), self.base)

    def __str__(self) -> str:
        parts = [] if self.base.is_zero() else [str(self.base)]
        for n, g in zip(self.names, self.generators):
            if g == ONE:
                parts.append(n)
            elif len(g.terms) == 1 and g.items()[0][1] == 1:
                parts.append(f"{n}*{g}")
            else:
                parts.append(f"{n}*({g})")
        return " + ".join(parts) if parts else "0"


def _canonical_family(ans: WindowAnsatz, base: list[Fraction], dirs: list[list[Fraction]]) -> AffineFamily:
    ech = RowEchelon(ans.size)
    for d in dirs:
        ech.add({n: x for n, x in enumerate(d) if x})
    ech.rref()
    b = ech.reduce({n: x for n, x in enumerate(base) if x})
    vec = lambda sparse: [sparse.get(n, Fraction(0)) for n in range(ans.size)]
    gens = [ans.assignment(vec(r))[0] for r in ech.pivots.values()]
    # highest monomial first, scaled to leading coefficient 1
    gens = [g / g.items()[0][1] for g in gens]
    gens.sort(key=lambda g: _order_key(g.items()[0][0]), reverse=True)
    return AffineFamily(ans.assignment(vec(b))[0], gens)


def _order_key(e: tuple[int, ...]):
    return (sum(e), e)


def _contains(big: AffineFamily, small: AffineFamily, n: int) -> bool:
    ans = WindowAnsatz(0, n, n)
    ech = RowEchelon(ans.size)
    for g in big.generators:
        ech.add(_coords(ans, g))
    if ech.reduce(_coords(ans, small.base - big.base)):
        return False
    return all(not ech.reduce(_coords(ans, g)) for g in small.generators)


def _coords(ans: WindowAnsatz, p: MPoly) -> dict[int, Fraction]:
    v = ans.vector({0: p})
    if v is None:
        raise ValueError(f"{p} leaves the degree bounds")
    return {n: x for n, x in enumerate(v) if x}


def _family_holds(A: GradedLCA, fam: AffineFamily) -> bool:
    # the self-pair residual is quadratic in the parameters, so {0, 1, 2}^k decides it
    for vals in itertools.product((0, 1, 2), repeat=len(fam.generators)):
        f0 = fam.member([Fraction(v) for v in vals])
        if not module_residual_from(A, f0, f0, f0, 0, 0).is_zero():
            return False
    return True


# -- stage 1: f_0 ------------------------------------------------------------------
@dataclass
class F0Result:
    families: list[AffineFamily]
    branch_steps: list[list[Step]]
    dead: int
    unresolved: int
    n_constraints: int
    irrational_cuts: int  # branches closed only for lack of a rational root
    verified: bool

    def strings(self) -> list[str]:
        return [str(f) for f in self.families]


def f0_residual(A: GradedLCA, f0: MPoly) -> MPoly:
    """The ``(0, 0)`` identity for a candidate ``f_0``."""
    return rank1_residual(A, {0: f0}, 0, 0)


def solve_rank1_f0(A: GradedLCA, deg_d: int = 3, deg_la: int = 3, *, allow_c_zero: bool = False) -> F0Result:
    """All ``f_0`` with ``deg_D <= deg_d``, ``deg_la <= deg_la`` solving the ``(0, 0)`` identity."""
    if A.mode.symbolic:
        raise RegimeMismatch("the f_0 stage needs concrete (a, c)")
    if A.mode.c == 0 and not allow_c_zero:
        raise RegimeMismatch("c = 0 leaves f_0 = l(la) unconstrained; the c = 0 case is solved on the full window")
    ans = WindowAnsatz(0, deg_d, deg_la)
    f = ans.upoly(0)
    forms = list(module_residual_from(A, f, f, f, 0, 0).constraints(["D", "la", "mu"]).values())
    res = solve_staged(forms, ans.size, ans.labels)
    fams: list[AffineFamily] = []
    for br in res.branches:
        base, dirs = br.direction_vectors(ans.size)
        fam = _canonical_family(ans, base, dirs)
        if not any(_contains(g, fam, max(deg_d, deg_la)) for g in fams):
            fams = [g for g in fams if not _contains(fam, g, max(deg_d, deg_la))] + [fam]
    fams.sort(key=lambda g: (-len(g.generators), str(g)))
    cuts = sum(1 for steps in res.dead for s in steps if s.move == "no-rational-root")
    return F0Result(
        fams,
        [br.steps for br in res.branches],
        len(res.dead),
        len(res.unresolved),
        len(forms),
        cuts,
        all(_family_holds(A, g) for g in fams),
    )


# -- stage 2: each f_be from the (0, be) identity ------------------------------------
@dataclass
class Specialization:
    label: str
    rank: int
    nullity: int


@dataclass
class GradeSolve:
    beta: int
    f0: str
    params: dict[str, Fraction]
    basis: list[MPoly]
    specializations: list[Specialization] = field(default_factory=list)


@dataclass
class PairCheck:
    f0: str
    params: dict[str, Fraction]
    unknowns: int
    pairs_used: int
    verdict: str  # "inconsistent", "trivial" or "survivors"
    detail: str = ""


def _bilinear_forms(A: GradedLCA, fam: AffineFamily, beta: int, block: WindowAnsatz, mu_value=None):
    """``(0, beta)`` constraints with the family parameters as extra unknowns ``B..``."""
    B = block.size
    f0 = UPoly.linear({B + k: g for k, g in enumerate(fam.generators)}, fam.base)
    fb = block.upoly(0)
    res = module_residual_from(A, f0, fb, fb, 0, beta)
    subset = ["D", "la", "mu"]
    if mu_value is not None:
        res = res.substitute({"mu": mu_value})
        subset = ["D", "la"]
    return list(res.constraints(subset).values())


def _rows_at(forms: list[QuadForm], B: int, values: Sequence[Fraction]) -> list[dict[int, Fraction]]:
    rows = []
    for q in forms:
        row: dict[int, Fraction] = {}
        for k, v in q.items():
            inner = [n for n in k if n < B]
            if len(inner) != 1:
                raise ValueError("f_be must enter the (0, be) identity linearly")
            w = v
            for n in k:
                if n >= B:
                    w *= values[n - B]
            row[inner[0]] = row.get(inner[0], 0) + w
        row = {n: x for n, x in row.items() if x}
        if row:
            rows.append(row)
    return rows


def _specialization_points(A: GradedLCA, beta: int) -> list[tuple[str, MPoly]]:
    # only meaningful for the CW bracket factor (a be + c) la - c mu
    if not is_cw_preset(A):
        return []
    av, cv = A.mode.a, A.mode.c
    k = (av * beta + cv) / cv
    if k == 0:
        return [("mu=0", ZERO), ("mu=-la", -la)]
    return [(f"mu={k * la}", k * la)]


# -- classification ---------------------------------------------------------------
@dataclass
class ModuleFamily:
    name: str
    formula: str
    params: tuple[str, ...] = ()
    points_checked: int = 1
    pairs_checked: int = 0
    residual: str = "0"


@dataclass
class Rank1Classification:
    regime: str
    window: int
    deg_d: int
    deg_la: int
    families: list[ModuleFamily]
    stage1: F0Result | None = None
    stage2: list[GradeSolve] = field(default_factory=list)
    stage3: list[PairCheck] = field(default_factory=list)
    complete: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def trivial_only(self) -> bool:
        return [f.name for f in self.families] == ["trivial"]


def loop_family_action(A: GradedLCA, aprime, bprime, cprime, window: int) -> dict[int, MPoly]:
    """``f_al = c * cprime^al * (D + aprime la + bprime)`` for the ``a = 0`` algebras."""
    cp = to_rational(cprime)
    if cp == 0:
        raise ValueError("cprime must be nonzero")
    t = multiplicative_scalars({g: cp ** g for g in range(-window, window + 1)})
    base = (D + to_rational(aprime) * la + to_rational(bprime)) * A.mode.c
    return {g: base * t[g] for g in t}


def _check_window(window: int) -> None:
    if window < 1:
        raise WindowViolation("window must be at least 1")
    if window > WINDOW_GUARD:
        raise WindowViolation(f"window {window} exceeds the guard {WINDOW_GUARD}")


def solve_rank1_family(
    A: GradedLCA,
    window: int = 3,
    deg_d: int = 3,
    deg_la: int = 3,
    grid: Sequence[Fraction] = DEFAULT_GRID,
) -> Rank1Classification:
    if A.mode.symbolic:
        raise RegimeMismatch("module classification needs concrete (a, c)")
    _check_window(window)
    reg = param_regime(A.mode)
    if reg == ABELIAN:
        raise RegimeMismatch("a = c = 0 is abelian: every D-free action is a module, nothing to classify")
    if reg == A_ZERO:
        return _loop_regime(A, window, deg_d, deg_la, grid)
    if reg == C_ZERO:
        return _full_window(A, reg, window, deg_d, deg_la)
    return _staged(A, reg, window, deg_d, deg_la, grid)


def _loop_regime(A, window, deg_d, deg_la, grid) -> Rank1Classification:
    pairs = window_pairs(window)
    points = 0
    bad = []
    for ap, bp, cp in itertools.product(grid, grid, [g for g in grid if g]):
        f = loop_family_action(A, ap, bp, cp, window)
        points += 1
        for x, y in pairs:
            r = rank1_residual(A, f, x, y)
            if not r.is_zero():
                bad.append(((ap, bp, cp), (x, y), str(r)))
                break
    fam = ModuleFamily(
        "loop",
        "c*cprime^al*(D + aprime*la + bprime)",
        ("aprime", "bprime", "cprime"),
        points,
        len(pairs),
        "0" if not bad else bad[0][2],
    )
    out = Rank1Classification(A_ZERO, window, deg_d, deg_la, [fam, ModuleFamily("trivial", "0", pairs_checked=len(pairs))])
    out.stage1 = solve_rank1_f0(A, deg_d, deg_la)
    out.notes.append("irreducible iff aprime != 0 (cited, not decided)")
    if bad:
        out.notes.append(f"residual nonzero at params {bad[0][0]} pair {bad[0][1]}")
    return out


def _window_forms(A: GradedLCA, ans: WindowAnsatz) -> list[QuadForm]:
    forms = []
    for x, y in window_pairs(ans.window):
        res = module_residual_from(A, ans.upoly(x), ans.upoly(y), ans.upoly(x + y), x, y)
        forms.extend(res.constraints(["D", "la", "mu"]).values())
    return forms


def _branch_family(ans: WindowAnsatz, br, n: int) -> ModuleFamily:
    base, dirs = br.direction_vectors(n)
    f = ans.assignment(base)
    if not dirs and all(p.is_zero() for p in f.values()):
        return ModuleFamily("trivial", "0", pairs_checked=len(window_pairs(ans.window)))
    text = "; ".join(f"f[{g}] = {p}" for g, p in f.items())
    return ModuleFamily("solution", text + (f" (+{len(dirs)} free directions)" if dirs else ""))


def _full_window(A, reg, window, deg_d, deg_la) -> Rank1Classification:
    ans = WindowAnsatz(window, deg_d, deg_la)
    forms = _window_forms(A, ans)
    res = solve_staged(forms, ans.size, ans.labels, max_branches=4096)
    fams = [_branch_family(ans, br, ans.size) for br in res.branches]
    out = Rank1Classification(reg, window, deg_d, deg_la, fams, complete=not res.unresolved)
    cuts = sum(1 for steps in res.dead for s in steps if s.move == "no-rational-root")
    out.notes.append(f"{len(forms)} constraints on {ans.size} unknowns; {len(res.dead)} dead branches")
    if cuts:
        out.notes.append(f"{cuts} branches closed for lack of a rational root")
    return out


def _staged(A, reg, window, deg_d, deg_la, grid) -> Rank1Classification:
    out = Rank1Classification(reg, window, deg_d, deg_la, [])
    s1 = solve_rank1_f0(A, deg_d, deg_la)
    out.stage1 = s1
    out.complete = not s1.unresolved and not s1.irrational_cuts
    block = WindowAnsatz(0, deg_d, deg_la)
    B = block.size
    grades = [b for b in range(-window, window + 1) if b != 0]
    pairs = window_pairs(window)
    survivors: list[ModuleFamily] = []
    for fam in s1.families:
        forms = {b: _bilinear_forms(A, fam, b, block) for b in grades}
        specs = {
            b: [(lbl, _bilinear_forms(A, fam, b, block, val)) for lbl, val in _specialization_points(A, b)]
            for b in grades
        }
        for values in itertools.product(grid, repeat=len(fam.generators)):
            f0 = fam.member(values)
            named = dict(zip(fam.names, values))
            sols: dict[int, list[MPoly]] = {}
            for b in grades:
                _, basis = nullspace(_rows_at(forms[b], B, values), B)
                sols[b] = [block.assignment(v)[0] for v in basis]
                gs = GradeSolve(b, str(fam), named, sols[b])
                for lbl, sforms in specs[b]:
                    ech, sb = nullspace(_rows_at(sforms, B, values), B)
                    gs.specializations.append(Specialization(lbl, ech.rank, len(sb)))
                out.stage2.append(gs)
            check = _pair_check(A, f0, sols, pairs, str(fam), named)
            out.stage3.append(check)
            if check.verdict == "trivial":
                if not any(f.name == "trivial" for f in survivors):
                    survivors.append(ModuleFamily("trivial", "0", pairs_checked=len(pairs)))
            elif check.verdict == "survivors":
                out.complete = False
                survivors.append(ModuleFamily("solution", f"f0 = {f0}: {check.detail}"))
    out.families = survivors
    return out


def _pair_check(A, f0: MPoly, sols: dict[int, list[MPoly]], pairs, label: str, named) -> PairCheck:
    """Impose every remaining pair on ``f_be = sum_k t_k basis_k``."""
    index: dict[int, UPoly] = {0: UPoly.known(f0)}
    n = 0
    for b, basis in sols.items():
        index[b] = UPoly.linear({n + k: p for k, p in enumerate(basis)})
        n += len(basis)
    if f0.is_zero() and n == 0:
        return PairCheck(label, named, 0, 0, "trivial")
    # opposite-grade pairs first: they are where a nonzero f_0 clashes
    order = sorted(pairs, key=lambda p: (p[0] + p[1] != 0, abs(p[0]) + abs(p[1]), p))
    forms: list[QuadForm] = []
    used = 0
    res = None
    for x, y in order:
        if x == 0 or y == 0:
            continue
        r = module_residual_from(A, index[x], index[y], index[x + y], x, y)
        forms.extend(r.constraints(["D", "la", "mu"]).values())
        used += 1
        if forms:
            res = solve_staged(forms, max(n, 1))
            if not res.branches and not res.unresolved:
                last = res.dead[0][-1].detail if res.dead and res.dead[0] else ""
                return PairCheck(label, named, n, used, "inconsistent", last)
    if res is None:
        res = solve_staged(forms, max(n, 1))
    trivial = f0.is_zero() and all(
        not br.free and all(not e for e in br.values.values()) for br in res.branches
    )
    if trivial and not res.unresolved:
        return PairCheck(label, named, n, used, "trivial")
    return PairCheck(label, named, n, used, "survivors", f"{len(res.branches)} branches, {len(res.unresolved)} unresolved")
