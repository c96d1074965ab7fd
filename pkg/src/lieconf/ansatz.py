"""Polynomials in unknown coefficients, and exact staged solving of quadratic systems.

An ansatz such as ``f(D, la) = sum u_pq D^p la^q`` is a :class:`UPoly`: a map from
monomials in the unknowns (sorted index tuples of length <= 2) to :class:`MPoly`
coefficients.  Matching coefficients of every ring monomial turns an identity into
a list of :data:`QuadForm` constraints over Q.

:func:`solve_staged` solves such constraint lists by the elimination moves used in
hand proofs: linear pivots, ``k*u^2 = 0``, univariate quadratics and common-factor
splits.  Every move is logged so a run doubles as a certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactpoly import SYMBOLS, MPoly, ZERO, RowEchelon, monomial

Key = tuple[int, ...]
QuadForm = dict[Key, Fraction]


def _mkey(k1: Key, k2: Key) -> Key:
    return tuple(sorted(k1 + k2))


class UPoly:
    """Polynomial in unknowns ``u_0 .. u_{n-1}`` with MPoly coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, MPoly] | None = None):
        self.terms: dict[Key, MPoly] = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def linear(cls, basis: Mapping[int, MPoly], constant: MPoly = ZERO) -> "UPoly":
        t = {(n,): p for n, p in basis.items()}
        if constant:
            t[()] = constant
        return cls(t)

    @classmethod
    def known(cls, p: MPoly) -> "UPoly":
        return cls({(): p})

    def __add__(self, other: "UPoly") -> "UPoly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, ZERO) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return UPoly(out)

    def __neg__(self) -> "UPoly":
        return UPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "UPoly") -> "UPoly":
        return self + (-other)

    def __mul__(self, other) -> "UPoly":
        if isinstance(other, UPoly):
            out: dict[Key, MPoly] = {}
            for k1, v1 in self.terms.items():
                for k2, v2 in other.terms.items():
                    k = _mkey(k1, k2)
                    out[k] = out.get(k, ZERO) + v1 * v2
            return UPoly(out)
        return UPoly({k: v * other for k, v in self.terms.items()})

    __rmul__ = __mul__

    def substitute(self, bindings) -> "UPoly":
        return UPoly({k: v.substitute(bindings) for k, v in self.terms.items()})

    def constraints(self, subset: Sequence[str]) -> dict[tuple[int, ...], QuadForm]:
        """Coefficient of each monomial in ``subset`` as a quadratic form over Q.

        Every coefficient MPoly must involve only ``subset``.
        """
        allowed = set(subset)
        pos = [SYMBOLS.index(s) for s in subset]
        out: dict[tuple[int, ...], QuadForm] = {}
        for k, p in self.terms.items():
            if not p.symbols() <= allowed:
                raise ValueError(f"coefficient {p} leaves the symbols {sorted(allowed)}")
            for e, v in p.terms.items():
                mono = tuple(e[x] for x in pos)
                q = out.setdefault(mono, {})
                s = q.get(k, 0) + v
                if s:
                    q[k] = s
                else:
                    q.pop(k, None)
        return {m: q for m, q in out.items() if q}

    def evaluate(self, values: Sequence[Fraction]) -> MPoly:
        acc = ZERO
        for k, p in self.terms.items():
            f = Fraction(1)
            for n in k:
                f *= values[n]
            if f:
                acc = acc + p * f
        return acc


def form_str(q: QuadForm, names: Sequence[str]) -> str:
    """Render a quadratic form with unknown ``names``, highest degree first."""
    if not q:
        return "0"
    items = sorted(q.items(), key=lambda t: (-len(t[0]), t[0]))
    out = []
    for n, (k, v) in enumerate(items):
        mono = "*".join(
            names[u] if k.count(u) == 1 else f"{names[u]}^{k.count(u)}" for u in sorted(set(k))
        )
        mag = abs(v)
        body = str(mag) if not mono else (mono if mag == 1 else f"{mag}*{mono}")
        sign = "-" if v < 0 else "+"
        out.append(("-" if v < 0 else "") + body if n == 0 else f" {sign} {body}")
    return "".join(out)


def eval_form(q: QuadForm, values: Mapping[int, Fraction] | Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for k, v in q.items():
        t = v
        for n in k:
            t *= values[n]
        total += t
    return total


# -- affine expressions and substitution into forms ----------------------------
Affine = dict[Key, Fraction]  # keys () or (j,)


def _subst_form(q: QuadForm, u: int, expr: Affine) -> QuadForm:
    out: QuadForm = {}

    def put(k: Key, v: Fraction):
        s = out.get(k, 0) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)

    for k, v in q.items():
        c = k.count(u)
        if c == 0:
            put(k, v)
            continue
        rest = tuple(x for x in k if x != u)
        if c == 1:
            for ek, ev in expr.items():
                put(_mkey(ek, rest), v * ev)
        else:
            for ek1, ev1 in expr.items():
                for ek2, ev2 in expr.items():
                    put(_mkey(ek1, ek2), v * ev1 * ev2)
    return out


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


@dataclass
class Step:
    move: str
    detail: str


@dataclass
class Branch:
    """One consistent outcome: each unknown is an affine function of the free ones."""

    values: dict[int, Affine]
    free: list[int]
    steps: list[Step] = field(default_factory=list)

    def direction_vectors(self, n: int) -> tuple[list[Fraction], list[list[Fraction]]]:
        base = [Fraction(0)] * n
        dirs = {f: [Fraction(0)] * n for f in self.free}
        for u in range(n):
            e = self.values.get(u, {(u,): Fraction(1)} if u in self.free else {})
            for k, v in e.items():
                if k == ():
                    base[u] = v
                else:
                    dirs[k[0]][u] = v
        return base, [dirs[f] for f in self.free]


@dataclass
class StagedResult:
    branches: list[Branch]
    dead: list[list[Step]]
    unresolved: list[list[Step]]


class _State:
    def __init__(self, forms: list[QuadForm], n: int, values=None, steps=None):
        self.forms = forms
        self.n = n
        self.values: dict[int, Affine] = dict(values or {})
        self.steps: list[Step] = list(steps or [])

    def copy(self) -> "_State":
        return _State([dict(f) for f in self.forms], self.n, self.values, self.steps)

    def assign(self, u: int, expr: Affine, names) -> None:
        expr = {k: v for k, v in expr.items() if v}
        for w, e in self.values.items():
            if any(k == (u,) for k in e):
                self.values[w] = _subst_form(e, u, expr)
        self.values[u] = expr
        self.forms = [_subst_form(f, u, expr) if any(u in k for k in f) else f for f in self.forms]
        self.forms = [f for f in self.forms if f]


def _affine_str(e: Affine, names) -> str:
    return form_str(e, names)


def solve_staged(
    forms: Iterable[QuadForm],
    n: int,
    names: Sequence[str] | None = None,
    max_branches: int = 256,
) -> StagedResult:
    """Exactly solve a system of quadratic forms ``q = 0`` over Q.

    Moves, in priority order: drop zero forms; nonzero constant kills the branch;
    a linear form pivots out its first unknown; a single-unknown form is solved over
    Q (branching on rational roots); a form whose terms share an unknown ``u``
    branches into ``u = 0`` and ``form / u = 0``.  If none applies the branch is
    reported as unresolved.
    """
    names = list(names) if names is not None else [f"u{n_}" for n_ in range(n)]
    start = _State([dict(f) for f in forms if f], n)
    todo = [start]
    done: list[Branch] = []
    dead: list[list[Step]] = []
    stuck: list[list[Step]] = []
    while todo:
        if len(done) + len(todo) > max_branches:
            raise RuntimeError("branch limit exceeded")
        st = todo.pop()
        while True:
            # dedupe, smallest first so pivots stay sparse
            seen = {}
            for f in st.forms:
                key = frozenset(f.items())
                seen.setdefault(key, f)
            st.forms = sorted(seen.values(), key=lambda f: (max(len(k) for k in f), len(f)))
            if not st.forms:
                free = [u for u in range(n) if u not in st.values]
                done.append(Branch(st.values, free, st.steps))
                break
            f = st.forms[0]
            if all(k == () for k in f):
                st.steps.append(Step("inconsistent", f"0 = {form_str(f, names)}"))
                dead.append(st.steps)
                break
            if max(len(k) for k in f) == 1:
                u = min(k[0] for k in f if k)
                cu = f[(u,)]
                expr = {k: -v / cu for k, v in f.items() if k != (u,)}
                st.steps.append(Step("linear", f"{form_str(f, names)} = 0  =>  {names[u]} = {_affine_str(expr, names)}"))
                st.assign(u, expr, names)
                continue
            move = _quadratic_move(st, names)
            if move is None:
                st.steps.append(Step("unresolved", f"{len(st.forms)} nonlinear forms remain"))
                stuck.append(st.steps)
                break
            children = move
            if len(children) == 1:
                st = children[0]
                continue
            todo.extend(reversed(children[1:]))
            st = children[0]
    return StagedResult(done, dead, stuck)


def _quadratic_move(st: _State, names) -> list[_State] | None:
    # k*u^2 alone, or a single-unknown quadratic
    for f in st.forms:
        used = {x for k in f for x in k}
        if len(used) != 1:
            continue
        (u,) = used
        A = f.get((u, u), Fraction(0))
        B = f.get((u,), Fraction(0))
        C = f.get((), Fraction(0))
        label = form_str(f, names)
        if B == 0 and C == 0:
            st.steps.append(Step("square", f"{label} = 0  =>  {names[u]} = 0"))
            st.assign(u, {}, names)
            return [st]
        disc = _rational_sqrt(B * B - 4 * A * C)
        if disc is None:
            st.steps.append(Step("no-rational-root", f"{label} = 0 has no root in Q"))
            return _dead_child(st)
        roots = sorted({(-B + disc) / (2 * A), (-B - disc) / (2 * A)})
        kids = []
        for r in roots:
            ch = st.copy()
            ch.steps.append(Step("root", f"{label} = 0  =>  {names[u]} = {r}"))
            ch.assign(u, {(): r} if r else {}, names)
            kids.append(ch)
        return kids
    # common unknown factor
    for f in st.forms:
        common = None
        for k in f:
            s = set(k)
            common = s if common is None else common & s
        if common:
            u = min(common)
            label = form_str(f, names)
            zero = st.copy()
            zero.steps.append(Step("split", f"{label} = 0  =>  {names[u]} = 0"))
            zero.assign(u, {}, names)
            other = st.copy()
            quotient: QuadForm = {}
            for k, v in f.items():
                lst = list(k)
                lst.remove(u)
                quotient[tuple(lst)] = v
            other.steps.append(Step("split", f"{label} = 0  =>  {form_str(quotient, names)} = 0, {names[u]} != 0"))
            other.forms.append(quotient)
            return [zero, other]
    return None


def _dead_child(st: _State) -> list[_State]:
    st.forms = [{(): Fraction(1)}]
    return [st]


def span_echelon(vectors: Iterable[Sequence[Fraction]], n: int) -> RowEchelon:
    ech = RowEchelon(n)
    for v in vectors:
        ech.add({i: x for i, x in enumerate(v) if x})
    return ech


@dataclass(frozen=True)
class WindowAnsatz:
    """Per-grade unknowns ``f_g(D, la) = sum u[g,p,q] D^p la^q`` on grades ``-window..window``."""

    window: int
    deg_d: int
    deg_la: int

    @property
    def grades(self) -> range:
        return range(-self.window, self.window + 1)

    @property
    def block(self) -> int:
        return (self.deg_d + 1) * (self.deg_la + 1)

    @property
    def size(self) -> int:
        return len(self.grades) * self.block

    def index(self, g: int, p: int, q: int) -> int:
        return ((g + self.window) * (self.deg_d + 1) + p) * (self.deg_la + 1) + q

    def label(self, n: int) -> str:
        g, rest = divmod(n, self.block)
        p, q = divmod(rest, self.deg_la + 1)
        return f"u[{g - self.window},{p},{q}]"

    @property
    def labels(self) -> list[str]:
        return [self.label(n) for n in range(self.size)]

    def upoly(self, g: int) -> UPoly:
        return UPoly.linear({
            self.index(g, p, q): monomial(D=p, la=q)
            for p in range(self.deg_d + 1)
            for q in range(self.deg_la + 1)
        })

    def vector(self, f: Mapping[int, MPoly]) -> tuple[Fraction, ...] | None:
        """Coordinates of an assignment, or None if it leaves the degree bounds."""
        v = [Fraction(0)] * self.size
        for g in self.grades:
            for e, val in f.get(g, ZERO).terms.items():
                p, q = e[8], e[9]
                if sum(e) != p + q or p > self.deg_d or q > self.deg_la:
                    return None
                v[self.index(g, p, q)] = val
        return tuple(v)

    def assignment(self, v: Sequence[Fraction]) -> dict[int, MPoly]:
        out = {}
        for g in self.grades:
            acc = ZERO
            for p in range(self.deg_d + 1):
                for q in range(self.deg_la + 1):
                    x = v[self.index(g, p, q)]
                    if x:
                        acc = acc + monomial(D=p, la=q) * x
            out[g] = acc
        return out
