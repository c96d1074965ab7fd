"""Exact rational polynomials over a closed symbol alphabet, plus exact linear algebra.

Scalars are :class:`fractions.Fraction`.  Polynomials live in the fixed ring
``Q[a, c, al, be, ga, i, j, k, D, la, mu]``; exponent vectors are dense tuples of
length 11 in that order.  ``al``/``be``/``ga`` are grade indices, ``i``/``j``/``k``
mode indices, ``D`` the derivation and ``la``/``mu`` the spectral parameters.

Canonical printing sorts terms graded-lex descending, e.g.::

    >>> str(var("la") * 2 + var("D") - 1)
    'D + 2*la - 1'
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import AlphabetViolation, ParseError

Rational = Fraction

SYMBOLS: tuple[str, ...] = ("a", "c", "al", "be", "ga", "i", "j", "k", "D", "la", "mu")
NSYM = len(SYMBOLS)
INDEX = {s: n for n, s in enumerate(SYMBOLS)}
ZERO_EXP = (0,) * NSYM

# accepted spellings when parsing; printing always uses SYMBOLS
_ALIASES = {"α": "al", "β": "be", "γ": "ga", "ρ": "ga", "∂": "D", "λ": "la", "μ": "mu"}

Scalar = Union[int, Fraction]
Exponent = tuple[int, ...]


def to_rational(x) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a reduced Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        text = x.strip().replace("−", "-")
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {x!r}") from exc
    raise TypeError(f"cannot coerce {type(x).__name__} to a rational")


def _sym_index(name: str) -> int:
    name = _ALIASES.get(name, name)
    try:
        return INDEX[name]
    except KeyError:
        raise AlphabetViolation(f"unknown symbol {name!r}") from None


def _grlex_key(e: Exponent):
    return (sum(e), e)


class MPoly:
    """Immutable sparse polynomial with Fraction coefficients.

    Construct with :func:`var`, :func:`const` or :func:`parse_poly`, then combine
    with ``+ - * **``.  Plain ints and Fractions coerce automatically.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, Scalar] | None = None):
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for e, v in terms.items():
                if len(e) != NSYM:
                    raise ValueError("exponent vector must have length 11")
                if v:
                    clean[tuple(e)] = to_rational(v)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Exponent, Fraction]) -> "MPoly":
        # caller guarantees no zero coefficients
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        """Terms in canonical (graded-lex descending) order."""
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def symbols(self) -> set[str]:
        used = set()
        for e in self._terms:
            for n, x in enumerate(e):
                if x:
                    used.add(SYMBOLS[n])
        return used

    def check_alphabet(self, allowed: Iterable[str]) -> None:
        extra = self.symbols() - set(allowed)
        if extra:
            raise AlphabetViolation(f"symbols {sorted(extra)} not allowed here")

    def degree(self, sym: str | None = None) -> int:
        """Total degree, or degree in one symbol; the zero polynomial has degree -1."""
        if not self._terms:
            return -1
        if sym is None:
            return max(sum(e) for e in self._terms)
        n = _sym_index(sym)
        return max(e[n] for e in self._terms)

    def is_constant(self) -> bool:
        return all(e == ZERO_EXP for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get(ZERO_EXP, Fraction(0))

    def as_constant(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.constant_term()

    # -- arithmetic ---------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "MPoly":
        if isinstance(other, MPoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, v in other._terms.items():
            s = out.get(e, 0) + v
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly._raw({e: -v for e, v in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return MPoly._raw({})
        out: dict[Exponent, Fraction] = {}
        for e1, v1 in self._terms.items():
            for e2, v2 in other._terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = out.get(e, 0) + v1 * v2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return MPoly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # division by a nonzero scalar only
        q = to_rational(other)
        return MPoly._raw({e: v / q for e, v in self._terms.items()})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- ring maps ----------------------------------------------------------
    def substitute(self, bindings: Mapping[str, "MPoly | Scalar"]) -> "MPoly":
        """Simultaneous substitution; unbound symbols are fixed."""
        if not bindings or not self._terms:
            return self
        bound = {_sym_index(s): MPoly._coerce(v) for s, v in bindings.items()}
        powers: dict[tuple[int, int], MPoly] = {}

        def power(n: int, d: int) -> MPoly:
            key = (n, d)
            if key not in powers:
                powers[key] = bound[n] ** d
            return powers[key]

        out = ZERO
        for e, v in self._terms.items():
            rest = list(e)
            factor = None
            for n in bound:
                if e[n]:
                    rest[n] = 0
                    p = power(n, e[n])
                    factor = p if factor is None else factor * p
            mono = MPoly._raw({tuple(rest): v})
            term = mono if factor is None else mono * factor
            out = out + term
        return out

    def evaluate(self, values: Mapping[str, Scalar]) -> Fraction:
        """Evaluate at a full numeric point (every used symbol must be bound)."""
        idx = {_sym_index(s): to_rational(v) for s, v in values.items()}
        total = Fraction(0)
        for e, v in self._terms.items():
            t = v
            for n, d in enumerate(e):
                if d:
                    if n not in idx:
                        raise ValueError(f"symbol {SYMBOLS[n]} not bound")
                    t *= idx[n] ** d
            total += t
        return total

    def coeff(self, subset: Sequence[str], exponents: Sequence[int]) -> "MPoly":
        """Coefficient of ``prod(subset[n] ** exponents[n])`` as a polynomial in the other symbols."""
        if len(subset) != len(exponents):
            raise ValueError("subset and exponents differ in length")
        pos = [_sym_index(s) for s in subset]
        if len(set(pos)) != len(pos):
            raise ValueError("subset symbols must be distinct")
        out = {}
        for e, v in self._terms.items():
            if all(e[p] == x for p, x in zip(pos, exponents)):
                r = list(e)
                for p in pos:
                    r[p] = 0
                out[tuple(r)] = v
        return MPoly._raw(out)

    def coefficients(self, subset: Sequence[str]) -> dict[tuple[int, ...], "MPoly"]:
        """Split by monomials in ``subset``: exponents -> coefficient polynomial."""
        pos = [_sym_index(s) for s in subset]
        out: dict[tuple[int, ...], dict] = {}
        for e, v in self._terms.items():
            key = tuple(e[p] for p in pos)
            r = list(e)
            for p in pos:
                r[p] = 0
            out.setdefault(key, {})[tuple(r)] = v
        return {k: MPoly._raw(t) for k, t in out.items()}

    # -- printing -----------------------------------------------------------
    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for n, (e, v) in enumerate(self.items()):
            mono = "*".join(
                SYMBOLS[s] if d == 1 else f"{SYMBOLS[s]}^{d}" for s, d in enumerate(e) if d
            )
            mag = abs(v)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if n == 0:
                pieces.append(("-" if v < 0 else "") + body)
            else:
                pieces.append((" - " if v < 0 else " + ") + body)
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"MPoly({str(self)!r})"


def const(x: Scalar) -> MPoly:
    v = to_rational(x)
    return MPoly._raw({ZERO_EXP: v} if v else {})


def var(name: str) -> MPoly:
    e = [0] * NSYM
    e[_sym_index(name)] = 1
    return MPoly._raw({tuple(e): Fraction(1)})


def monomial(**exps: int) -> MPoly:
    e = [0] * NSYM
    for s, d in exps.items():
        e[_sym_index(s)] = d
    return MPoly._raw({tuple(e): Fraction(1)})


ZERO = MPoly._raw({})
ONE = MPoly._raw({ZERO_EXP: Fraction(1)})


def poly_arith(op: str, p: MPoly, q) -> MPoly:
    """Functional front door for ``add | mul | neg | pow``."""
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op == "neg":
        return -p
    if op == "pow":
        return p ** q
    raise ValueError(f"unknown op {op!r}")


def substitute(p: MPoly, bindings: Mapping[str, MPoly | Scalar]) -> MPoly:
    return p.substitute(bindings)


def coeff_extract(p: MPoly, subset: Sequence[str], exponents: Sequence[int]) -> MPoly:
    return p.coeff(subset, exponents)


# -- parsing ------------------------------------------------------------------
_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-zαβγρ∂λμ_]+)|(.))")


def parse_poly(text: str) -> MPoly:
    """Parse the canonical format (and ordinary infix with parentheses)."""
    text = text.replace("−", "-").replace("·", "*").replace("**", "^")
    tokens: list[tuple[str, str]] = []
    for m in _TOKEN.finditer(text):
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", num))
        elif name is not None:
            tokens.append(("sym", name))
        elif op is not None and not op.isspace():
            if op not in "+-*/^()":
                raise ParseError(f"unexpected character {op!r} in {text!r}")
            tokens.append(("op", op))
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else ("end", "")

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def expr() -> MPoly:
        sign = 1
        if peek() == ("op", "-"):
            take()
            sign = -1
        elif peek() == ("op", "+"):
            take()
        acc = term() * sign
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            t = term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term() -> MPoly:
        acc = factor()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            f = factor()
            if op == "*":
                acc = acc * f
            else:
                if not f.is_constant() or f.is_zero():
                    raise ParseError("division only by a nonzero constant")
                acc = acc / f.as_constant()
        return acc

    def factor() -> MPoly:
        if peek() == ("op", "-"):
            take()
            return -factor()
        b = base()
        if peek() == ("op", "^"):
            take()
            kind, val = take()
            if kind != "num":
                raise ParseError("exponent must be a non-negative integer")
            b = b ** int(val)
        return b

    def base() -> MPoly:
        kind, val = take()
        if kind == "num":
            return const(int(val))
        if kind == "sym":
            return var(val)
        if (kind, val) == ("op", "("):
            inner = expr()
            if take() != ("op", ")"):
                raise ParseError(f"unbalanced parentheses in {text!r}")
            return inner
        raise ParseError(f"unexpected token {val!r} in {text!r}")

    if not tokens:
        raise ParseError("empty polynomial string")
    result = expr()
    if pos != len(tokens):
        raise ParseError(f"trailing input in {text!r}")
    return result


# -- exact linear algebra ------------------------------------------------------
SparseRow = dict[int, Fraction]


class RowEchelon:
    """Incremental exact row reduction over Q with sparse rows.

    Rows are reduced against existing pivots on insertion; the pivot of a new row
    is its first nonzero column after reduction.  :meth:`rref` back-substitutes to
    the unique reduced row echelon form of the row space.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, SparseRow] = {}  # pivot column -> row with 1 at pivot

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: SparseRow) -> SparseRow:
        row = {c: v for c, v in row.items() if v}
        while row:
            hit = [c for c in row if c in self.pivots]
            if not hit:
                break
            c = min(hit)
            f = row[c]
            for cc, vv in self.pivots[c].items():
                s = row.get(cc, 0) - f * vv
                if s:
                    row[cc] = s
                else:
                    row.pop(cc, None)
        return row

    def add(self, row: SparseRow) -> bool:
        """Insert a row; returns True if it increased the rank."""
        r = self.reduce(row)
        if not r:
            return False
        p = min(r)
        inv = 1 / r[p]
        self.pivots[p] = {c: v * inv for c, v in r.items()}
        return True

    def contains(self, row: SparseRow) -> bool:
        return not self.reduce(row)

    def rref(self) -> dict[int, SparseRow]:
        order = sorted(self.pivots, reverse=True)
        done: dict[int, SparseRow] = {}
        for p in order:
            r = dict(self.pivots[p])
            for q in [c for c in r if c != p and c in done]:
                f = r.pop(q)
                for cc, vv in done[q].items():
                    if cc == q:
                        continue
                    s = r.get(cc, 0) - f * vv
                    if s:
                        r[cc] = s
                    else:
                        r.pop(cc, None)
            done[p] = r
        self.pivots = {p: done[p] for p in sorted(done)}
        return self.pivots

    def nullspace(self) -> list[tuple[Fraction, ...]]:
        """Nullspace basis whose rows are in reduced echelon form (leading entries 1)."""
        piv = self.rref()
        kernel = RowEchelon(self.ncols)
        for f in range(self.ncols):
            if f in piv:
                continue
            v = [Fraction(0)] * self.ncols
            v[f] = Fraction(1)
            for p, r in piv.items():
                if f in r:
                    v[p] = -r[f]
            kernel.add({n: x for n, x in enumerate(v) if x})
        out = []
        for p, r in kernel.rref().items():
            lead = r[p]
            v = [Fraction(0)] * self.ncols
            for n, x in r.items():
                v[n] = x / lead
            out.append(tuple(v))
        return out


def rank_of(vectors: Iterable[Sequence[Scalar] | SparseRow], ncols: int) -> int:
    ech = RowEchelon(ncols)
    for v in vectors:
        ech.add(v if isinstance(v, dict) else {n: to_rational(x) for n, x in enumerate(v) if x})
    return ech.rank


@dataclass(frozen=True)
class LinearSystem:
    """Rows ``(coefficients, rhs)`` over the ordered unknown ``labels``."""

    labels: tuple[str, ...]
    rows: tuple[tuple[tuple[Fraction, ...], Fraction], ...] = field(default=())

    def __post_init__(self):
        n = len(self.labels)
        for coeffs, _ in self.rows:
            if len(coeffs) != n:
                raise ValueError("row length must equal the number of unknowns")

    @classmethod
    def build(cls, labels: Sequence[str], rows: Iterable[tuple[Sequence[Scalar], Scalar]]):
        return cls(
            tuple(labels),
            tuple((tuple(to_rational(x) for x in r), to_rational(b)) for r, b in rows),
        )


@dataclass(frozen=True)
class AffineSolution:
    particular: tuple[Fraction, ...]
    nullspace: tuple[tuple[Fraction, ...], ...]
    rank: int

    @property
    def dimension(self) -> int:
        return len(self.nullspace)


def solve_linear(sys: LinearSystem) -> AffineSolution | None:
    """Exact solve; returns ``None`` when the system is infeasible."""
    n = len(sys.labels)
    ech = RowEchelon(n + 1)  # last column is the right-hand side
    hom = RowEchelon(n)
    for coeffs, b in sys.rows:
        row = {c: v for c, v in enumerate(coeffs) if v}
        hom.add(row)
        if b:
            row[n] = -b
        ech.add(row)
    if n in ech.pivots:
        return None
    piv = ech.rref()
    particular = [Fraction(0)] * n
    for p, r in piv.items():
        particular[p] = -r.get(n, Fraction(0))
    return AffineSolution(tuple(particular), tuple(hom.nullspace()), hom.rank)


def nullspace(rows: Iterable[SparseRow], ncols: int) -> tuple[RowEchelon, list[tuple[Fraction, ...]]]:
    """Homogeneous solve for sparse rows; returns the echelon form and the kernel basis."""
    ech = RowEchelon(ncols)
    for r in rows:
        ech.add(r)
    return ech, ech.nullspace()


def lcm_denominator(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = out * v.denominator // math.gcd(out, v.denominator)
    return out
