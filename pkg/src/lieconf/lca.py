"""Z-graded Lie conformal algebras with one C[D]-generator per grade.

A presentation is a single bracket polynomial ``P(al, be, D, la)`` with
``[L_al la L_be] = P * L_{al+be}``.  The axioms become polynomial identities:

* skew symmetry:  ``P(al, be, D, la) + P(be, al, D, -la - D) == 0``
* Jacobi:         ``T1 - T2 - T3 == 0`` (see :func:`jacobi_residual`)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Union

from .errors import ParseError, RegimeMismatch, WindowViolation
from .exactpoly import ZERO, MPoly, Scalar, parse_poly, to_rational, var

a, c, al, be, ga = var("a"), var("c"), var("al"), var("be"), var("ga")
D, la, mu = var("D"), var("la"), var("mu")

PRESENTATION_SYMBOLS = ("a", "c", "al", "be", "D", "la")
ACTION_SYMBOLS = ("a", "c", "al", "D", "la")


@dataclass(frozen=True)
class ParamMode:
    """``a, c`` either symbolic (``a is None``) or concrete rationals."""

    a: Fraction | None = None
    c: Fraction | None = None

    def __post_init__(self):
        if (self.a is None) != (self.c is None):
            raise ValueError("a and c must both be symbolic or both concrete")
        if self.a is not None:
            object.__setattr__(self, "a", to_rational(self.a))
            object.__setattr__(self, "c", to_rational(self.c))

    @classmethod
    def concrete(cls, a: Scalar, c: Scalar) -> "ParamMode":
        return cls(to_rational(a), to_rational(c))

    @property
    def symbolic(self) -> bool:
        return self.a is None

    def bindings(self) -> dict[str, Fraction]:
        return {} if self.symbolic else {"a": self.a, "c": self.c}

    def apply(self, p: MPoly) -> MPoly:
        return p.substitute(self.bindings()) if not self.symbolic else p

    def describe(self):
        return "SYMBOLIC" if self.symbolic else {"a": str(self.a), "c": str(self.c)}


SYMBOLIC = ParamMode()

ABELIAN = "ABELIAN"
A_ZERO = "A_ZERO"  # loop Virasoro type
C_ZERO = "C_ZERO"  # Block type
RATIO_INTEGER = "RATIO_INTEGER"  # c/a in Z
RATIO_GENERIC = "RATIO_GENERIC"


def param_regime(mode: ParamMode) -> str:
    """Which branch of the CW(a, c) case split a concrete ``(a, c)`` falls into."""
    if mode.symbolic:
        raise RegimeMismatch("the case split needs concrete (a, c)")
    if mode.a == 0:
        return ABELIAN if mode.c == 0 else A_ZERO
    if mode.c == 0:
        return C_ZERO
    return RATIO_INTEGER if (mode.c / mode.a).denominator == 1 else RATIO_GENERIC


@dataclass(frozen=True)
class GradedLCA:
    P: MPoly
    mode: ParamMode = SYMBOLIC
    name: str = ""

    def bracket(self, x, y, d, l) -> MPoly:
        """``P(x, y, d, l)`` with simultaneous substitution."""
        return self.P.substitute({"al": x, "be": y, "D": d, "la": l})

    def scalar(self, x: MPoly) -> MPoly:
        return self.mode.apply(x)


def cw_polynomial() -> MPoly:
    return (a * al + c) * D + (a * al + a * be + 2 * c) * la


def build_graded_lca(P: MPoly, mode: ParamMode = SYMBOLIC, name: str = "") -> GradedLCA:
    """Validate the alphabet and specialize ``a, c`` in CONCRETE mode."""
    P.check_alphabet(PRESENTATION_SYMBOLS)
    return GradedLCA(mode.apply(P), mode, name)


def cw(a_val: Scalar | None = None, c_val: Scalar | None = None) -> GradedLCA:
    """The preset CW(a, c); symbolic when both values are omitted."""
    if a_val is None and c_val is None:
        return build_graded_lca(cw_polynomial(), SYMBOLIC, "CW(a,c)")
    mode = ParamMode.concrete(a_val, c_val)
    return build_graded_lca(cw_polynomial(), mode, f"CW({mode.a},{mode.c})")


def virasoro() -> GradedLCA:
    """Single-grade Virasoro conformal algebra: ``[L la L] = (D + 2 la) L``."""
    return build_graded_lca(D + 2 * la, ParamMode.concrete(0, 1), "Vir")


def is_cw_preset(A: GradedLCA) -> bool:
    return A.P == A.mode.apply(cw_polynomial())


def skew_residual(A: GradedLCA) -> MPoly:
    return A.P + A.bracket(be, al, D, -la - D)


def jacobi_residual(A: GradedLCA) -> MPoly:
    """``T1 - T2 - T3`` for the triple ``(L_al, L_be, L_ga)`` and parameters ``la, mu``.

    T1 = [L_al la [L_be mu L_ga]],  T2 = [[L_al la L_be] la+mu L_ga],
    T3 = [L_be mu [L_al la L_ga]], with sesquilinearity applied on every slot.
    """
    t1 = A.bracket(be, ga, D + la, mu) * A.bracket(al, be + ga, D, la)
    t2 = A.bracket(al, be, -la - mu, la) * A.bracket(al + be, ga, D, la + mu)
    t3 = A.bracket(al, ga, D + mu, la) * A.bracket(be, al + ga, D, mu)
    return t1 - t2 - t3


def k_products(A: GradedLCA) -> list[MPoly]:
    """Entry ``k`` is ``L_al (k) L_be``: ``k!`` times the ``la^k`` coefficient of P."""
    return [A.P.coeff(["la"], [k]) * math.factorial(k) for k in range(A.P.degree("la") + 1)]


def from_k_products(table: list[MPoly]) -> MPoly:
    return sum((p * la ** k / math.factorial(k) for k, p in enumerate(table)), ZERO)


GradeArg = Union[int, MPoly]


def multiplicative_scalars(scalars: Mapping[int, Scalar]) -> dict[int, Fraction]:
    """Normalize a window of scalars ``t``; requires ``t_0 = 1`` and ``t_{x+y} = t_x t_y``."""
    t = {int(k): to_rational(v) for k, v in scalars.items()}
    if t.get(0) != 1:
        raise ValueError("scalar sequence needs t_0 = 1")
    for x in t:
        for y in t:
            if x + y in t and t[x + y] != t[x] * t[y]:
                raise ValueError(f"t_{x + y} != t_{x} * t_{y}")
    return t


@dataclass(frozen=True)
class Rank1Action:
    """``L_al la v = t_al * f(al, D, la) v``; ``scalars`` is an optional window of ``t``."""

    f: MPoly
    scalars: Mapping[int, Fraction] | None = None

    def __post_init__(self):
        self.f.check_alphabet(ACTION_SYMBOLS)
        if self.scalars is not None:
            object.__setattr__(self, "scalars", multiplicative_scalars(self.scalars))

    @classmethod
    def geometric(cls, f: MPoly, ratio: Scalar, window: int) -> "Rank1Action":
        r = to_rational(ratio)
        if r == 0:
            raise ValueError("ratio must be nonzero")
        return cls(f, {n: r ** n for n in range(-window, window + 1)})

    def at(self, grade: GradeArg, mode: ParamMode) -> MPoly:
        """``f_grade(D, la)`` (an MPoly in D, la and possibly symbolic grades)."""
        base = mode.apply(self.f)
        if isinstance(grade, int):
            base = base.substitute({"al": grade})
            if self.scalars is not None:
                if grade not in self.scalars:
                    raise WindowViolation(f"grade {grade} outside the scalar window")
                base = base * self.scalars[grade]
        else:
            if self.scalars is not None:
                raise WindowViolation("scalar sequences need concrete integer grades")
            base = base.substitute({"al": grade})
        return base


def _grade(x: GradeArg) -> MPoly:
    return x if isinstance(x, MPoly) else MPoly({}) + x


def module_residual_from(A: GradedLCA, f_x: MPoly, f_y: MPoly, f_xy: MPoly, x: GradeArg, y: GradeArg) -> MPoly:
    """``f_y(D+la, mu) f_x(D, la) - f_x(D+mu, la) f_y(D, mu) - P(x, y, -la-mu, la) f_xy(D, la+mu)``."""
    lhs = f_y.substitute({"D": D + la, "la": mu}) * f_x
    rhs = f_x.substitute({"D": D + mu}) * f_y.substitute({"la": mu})
    coeff = A.bracket(_grade(x), _grade(y), -la - mu, la)
    return lhs - rhs - coeff * f_xy.substitute({"la": la + mu})


def module_action_residual(A: GradedLCA, act: Rank1Action, x: GradeArg, y: GradeArg) -> MPoly:
    """Module-axiom residual for the grade pair ``(x, y)``; zero iff the axiom holds there."""
    if act.scalars is not None:
        for g in (x, y):
            if not isinstance(g, int):
                raise WindowViolation("scalar sequences need concrete integer grades")
        if isinstance(x, int) and isinstance(y, int) and x + y not in act.scalars:
            raise WindowViolation(f"grade {x + y} outside the scalar window")
    xy = x + y if isinstance(x, int) and isinstance(y, int) else _grade(x) + _grade(y)
    return module_residual_from(A, act.at(x, A.mode), act.at(y, A.mode), act.at(xy, A.mode), x, y)


# -- text config -----------------------------------------------------------------
def parse_mode(a_text: str, c_text: str) -> ParamMode:
    sa, sc = a_text.strip() == "sym", c_text.strip() == "sym"
    if sa and sc:
        return SYMBOLIC
    if sa or sc:
        raise ParseError("a and c must both be 'sym' or both rational")
    return ParamMode.concrete(to_rational(a_text), to_rational(c_text))


def load_presentation(source: str | Path) -> GradedLCA:
    """Read ``key = value`` lines: ``name``, ``a``, ``c`` (rational or ``sym``) and ``P``."""
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, Path) else source
    fields: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in ("name", "a", "c", "P"):
            raise ParseError(f"line {n}: unknown key {k!r}")
        fields[k] = v
    if "P" not in fields:
        raise ParseError("presentation needs a 'P' line")
    mode = parse_mode(fields.get("a", "sym"), fields.get("c", "sym"))
    return build_graded_lca(parse_poly(fields["P"]), mode, fields.get("name", ""))


def dump_presentation(A: GradedLCA) -> str:
    if A.mode.symbolic:
        av = cv = "sym"
    else:
        av, cv = str(A.mode.a), str(A.mode.c)
    return f"name = {A.name}\na = {av}\nc = {cv}\nP = {A.P}\n"
