"""Exponent calculus for formal Green-function monomials.

A monomial is a prefactor ``N^{e} q^{f} C3 C4 ...`` times factors

* ``G^{m}_(x,y)`` / ``Gs^{m}_(x,y)``: the entry ``(Y^m)_{xy}`` with ``Y = G`` or ``G*``,
* ``[G]^{p}`` / ``[Gs]^{p}``: powers of the shifted statistic ``[Y]``,
* ``<...>``: one centred product of first-power entries.

An optional leading ``sum_(i,j,...)`` declares the summation indices; without
it the indices are those that appear in factors. Whitespace and ``*`` between
tokens are ignored. Exponents are affine forms in ``(1, alpha, beta, n)`` with
exact rational coefficients, ``n`` being the symbolic moment order.

Prefactor bookkeeping follows ``N^{-nu1}``: ``N^{e}`` adds ``-e`` to ``nu1``,
``q^{f}`` adds ``-f beta`` and ``Ck`` adds ``1 + (k-2) beta``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ClassificationError, DomainError, ParseError, PreconditionError

__all__ = [
    "Affine",
    "parse_affine",
    "GreenPower",
    "Bracket",
    "CenteredProduct",
    "FormalMonomial",
    "ExponentProfile",
    "BoundTerm",
    "BoundSum",
    "BoundExpr",
    "RecursionRecord",
    "parse",
    "classify",
    "classes",
    "profile",
    "bound",
    "evaluate",
    "recursion_step",
    "steps_to_absorb",
    "LEMMAS",
]

_BASIS = ("1", "alpha", "beta", "n")
_SYMBOL_ALIASES = {"alpha": "alpha", "α": "alpha", "beta": "beta", "β": "beta", "n": "n"}


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


class Affine:
    """Immutable affine form ``c + a*alpha + b*beta + d*n`` with rational coefficients."""

    __slots__ = ("_c",)

    def __init__(self, const=0, alpha=0, beta=0, n=0):
        self._c = (_frac(const), _frac(alpha), _frac(beta), _frac(n))

    @classmethod
    def _from(cls, coeffs):
        obj = cls.__new__(cls)
        obj._c = tuple(coeffs)
        return obj

    @staticmethod
    def lift(x) -> "Affine":
        return x if isinstance(x, Affine) else Affine(x)

    const = property(lambda self: self._c[0])
    alpha = property(lambda self: self._c[1])
    beta = property(lambda self: self._c[2])
    n = property(lambda self: self._c[3])

    def coeff(self, sym: str) -> Fraction:
        return self._c[_BASIS.index(sym)]

    @property
    def is_constant(self) -> bool:
        return not any(self._c[1:])

    def __add__(self, other):
        o = Affine.lift(other)
        return Affine._from(a + b for a, b in zip(self._c, o._c))

    __radd__ = __add__

    def __neg__(self):
        return Affine._from(-a for a in self._c)

    def __sub__(self, other):
        return self + (-Affine.lift(other))

    def __rsub__(self, other):
        return Affine.lift(other) - self

    def __mul__(self, k):
        if isinstance(k, Affine):
            if k.is_constant:
                k = k.const
            elif self.is_constant:
                return k * self.const
            else:
                raise TypeError("product of two non-constant affine forms is not affine")
        k = _frac(k)
        return Affine._from(a * k for a in self._c)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1 / _frac(k))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Affine(other)
        return isinstance(other, Affine) and self._c == other._c

    def __hash__(self):
        return hash(self._c)

    def substitute(self, alpha=None, beta=None, n=None) -> "Affine":
        c, a, b, d = self._c
        if alpha is not None:
            c, a = c + a * _frac(alpha), Fraction(0)
        if beta is not None:
            c, b = c + b * _frac(beta), Fraction(0)
        if n is not None:
            c, d = c + d * _frac(n), Fraction(0)
        return Affine._from((c, a, b, d))

    def value(self, alpha=0.0, beta=0.0, n=None) -> float:
        if self.n and n is None:
            raise PreconditionError(f"affine form {self} depends on n; bind n to evaluate")
        c, a, b, d = self._c
        return float(c) + float(a) * alpha + float(b) * beta + float(d) * (0 if n is None else n)

    def __float__(self):
        if not self.is_constant:
            raise TypeError(f"{self} is not constant")
        return float(self.const)

    def __str__(self):
        parts = []
        for coef, sym in zip(self._c, _BASIS):
            if coef == 0:
                continue
            mag = abs(coef)
            if sym == "1":
                body = str(mag)
            elif mag == 1:
                body = sym
            else:
                body = f"{mag}*{sym}"
            sign = "-" if coef < 0 else "+"
            parts.append((sign, body))
        if not parts:
            return "0"
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += sign + body
        return out

    def __repr__(self):
        return f"Affine({self})"


_AFF_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?(?:\.\d+)?)|([A-Za-zαβ]+)|([+\-*/()]))")


def parse_affine(text: str, offset: int = 0, source: str | None = None) -> Affine:
    """Parse sums of rational multiples of ``1, alpha, beta, n``.

    Accepts forms such as ``n-1``, ``-3/2``, ``2*beta``, ``2n``, ``1-alpha``.
    """
    src = source if source is not None else text
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _AFF_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r} in exponent", offset + pos, src)
        num, name, op = m.groups()
        start = m.start(m.lastindex)
        toks.append((num, name, op, offset + start))
        pos = m.end()
    toks.append((None, None, "END", offset + len(text)))
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def atom():
        num, name, op, p = take()
        if num is not None:
            val = Fraction(num)
            nxt = peek()
            if nxt[1] is not None:  # implicit product such as 2n
                return atom_symbol(take()) * val
            if nxt[2] == "*":
                take()
                return atom() * val
            return Affine(val)
        if name is not None:
            return atom_symbol((num, name, op, p))
        if op == "(":
            e = expr()
            if take()[2] != ")":
                raise ParseError("expected ')'", p, src)
            return e
        raise ParseError("expected a number, symbol or '('", p, src)

    def atom_symbol(tok):
        _, name, _, p = tok
        sym = _SYMBOL_ALIASES.get(name)
        if sym is None:
            raise ParseError(f"unknown symbol {name!r} in exponent", p, src)
        return Affine(**{sym: 1})

    def term():
        sign = 1
        while peek()[2] in ("+", "-"):
            if take()[2] == "-":
                sign = -sign
        val = atom()
        while peek()[2] in ("*", "/"):
            op = take()[2]
            rhs = atom()
            if op == "*":
                val = val * rhs
            else:
                if not rhs.is_constant or rhs.const == 0:
                    raise ParseError("division by a non-constant or zero", peek()[3], src)
                val = val / rhs.const
        return val * sign

    def expr():
        val = term()
        while peek()[2] in ("+", "-"):
            val = val + term()  # term consumes the sign
        return val

    if toks[0][2] == "END":
        raise ParseError("empty exponent", offset, src)
    result = expr()
    if peek()[2] != "END":
        raise ParseError("unexpected trailing input in exponent", peek()[3], src)
    return result


# -- structure -------------------------------------------------------------------

_TAGS = {"G": "G", "Gs": "Gs"}


@dataclass(frozen=True)
class GreenPower:
    """``(Y^m)_{xy}``."""

    tag: str
    power: int
    x: str
    y: str

    @property
    def off_diagonal(self) -> bool:
        return self.x != self.y

    def __str__(self):
        p = "" if self.power == 1 else f"^{{{self.power}}}"
        return f"{self.tag}{p}_({self.x},{self.y})"


@dataclass(frozen=True)
class Bracket:
    """``[Y]^p`` with ``p`` affine in ``n``."""

    tag: str
    power: Affine

    def __str__(self):
        return f"[{self.tag}]" if self.power == 1 else f"[{self.tag}]^{{{self.power}}}"


@dataclass(frozen=True)
class CenteredProduct:
    entries: tuple

    def __str__(self):
        return "<" + " ".join(str(e) for e in self.entries) + ">"


@dataclass(frozen=True)
class FormalMonomial:
    n_exponent: Affine = field(default_factory=Affine)
    q_exponent: Fraction = Fraction(0)
    cumulants: tuple = ()
    factors: tuple = ()
    declared: tuple | None = None

    @property
    def centered(self):
        c = [f for f in self.factors if isinstance(f, CenteredProduct)]
        return c[0] if c else None

    @property
    def entries(self):
        out = []
        for f in self.factors:
            if isinstance(f, GreenPower):
                out.append(f)
            elif isinstance(f, CenteredProduct):
                out.extend(f.entries)
        return out

    @property
    def brackets(self):
        return [f for f in self.factors if isinstance(f, Bracket)]

    @property
    def indices(self) -> tuple:
        if self.declared is not None:
            return self.declared
        seen = []
        for e in self.entries:
            for s in (e.x, e.y):
                if s not in seen:
                    seen.append(s)
        return tuple(seen)

    @property
    def nu1(self) -> Affine:
        nu = -self.n_exponent - Affine(beta=self.q_exponent)
        for k in self.cumulants:
            nu = nu + Affine(1, beta=k - 2)
        return nu

    def __str__(self):
        parts = []
        if self.declared is not None:
            parts.append("sum_(" + ",".join(self.declared) + ")")
        if self.n_exponent != 0:
            parts.append(f"N^{{{self.n_exponent}}}")
        if self.q_exponent != 0:
            parts.append(f"q^{{{self.q_exponent}}}")
        parts.extend(f"C{k}" for k in self.cumulants)
        parts.extend(str(f) for f in self.factors)
        return " ".join(parts) if parts else "1"


_INDEX = re.compile(r"[A-Za-z][A-Za-z0-9]*")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.declared = None

    def error(self, msg, pos=None):
        raise ParseError(msg, self.pos if pos is None else pos, self.text)

    def skip(self):
        t = self.text
        while self.pos < len(t) and (t[self.pos].isspace() or t[self.pos] == "*"):
            self.pos += 1

    def at_end(self):
        self.skip()
        return self.pos >= len(self.text)

    def startswith(self, s):
        return self.text.startswith(s, self.pos)

    def expect(self, s):
        if not self.startswith(s):
            self.error(f"expected {s!r}")
        self.pos += len(s)

    def braced(self):
        """Content of ``{...}`` parsed as an affine form."""
        self.expect("{")
        start = self.pos
        end = self.text.find("}", start)
        if end < 0:
            self.error("unterminated '{'", start - 1)
        body = self.text[start:end]
        self.pos = end + 1
        return parse_affine(body, offset=start, source=self.text)

    def index(self):
        m = _INDEX.match(self.text, self.pos)
        if not m:
            self.error("expected an index symbol")
        self.pos = m.end()
        return m.group(0)

    def index_list(self):
        self.expect("(")
        out = [self.index()]
        while True:
            self.skip_ws()
            if self.startswith(","):
                self.pos += 1
                self.skip_ws()
                out.append(self.index())
            else:
                break
        self.skip_ws()
        self.expect(")")
        return out

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def tag(self):
        if self.startswith("Gs"):
            self.pos += 2
            return "Gs"
        if self.startswith("G"):
            self.pos += 1
            return "G"
        self.error("expected 'G' or 'Gs'")

    def integer_power(self):
        start = self.pos
        p = self.braced()
        if not p.is_constant or p.const.denominator != 1 or p.const < 1:
            self.error("entry power must be a positive integer", start)
        return int(p.const)

    def green_power(self):
        start = self.pos
        tag = self.tag()
        power = 1
        if self.startswith("^"):
            self.pos += 1
            power = self.integer_power()
        if not self.startswith("_"):
            self.error("expected '_(' after matrix symbol")
        self.pos += 1
        idx_pos = self.pos
        idx = self.index_list()
        if len(idx) != 2:
            self.error("an entry needs exactly two indices", start)
        if self.declared is not None:
            for s in idx:
                if s not in self.declared:
                    self.error(f"index {s!r} is not declared in sum_(...)", idx_pos)
        return GreenPower(tag, power, idx[0], idx[1])

    def bracket(self):
        self.expect("[")
        tag = self.tag()
        self.expect("]")
        power = Affine(1)
        if self.startswith("^"):
            self.pos += 1
            p0 = self.pos
            power = self.braced()
            if power.alpha or power.beta:
                self.error("bracket power may depend on n only", p0)
            if power.n < 0 or power.value(n=1) < 0:
                self.error("bracket power must be non-negative for n >= 1", p0)
        return Bracket(tag, power)

    def centered(self):
        start = self.pos
        self.expect("<")
        entries = []
        while True:
            self.skip()
            if self.startswith(">"):
                self.pos += 1
                break
            if self.pos >= len(self.text):
                self.error("unterminated '<'", start)
            if not self.startswith("G"):
                self.error("only first-power entries are allowed inside '<...>'")
            p0 = self.pos
            e = self.green_power()
            if e.power != 1:
                self.error("entries inside '<...>' must have power 1", p0)
            entries.append(e)
        if not entries:
            self.error("empty centred product", start)
        return CenteredProduct(tuple(entries))

    def monomial(self):
        n_exp = Affine()
        q_exp = Fraction(0)
        cumulants = []
        factors = []
        declared = None
        seen_centered = False
        while not self.at_end():
            p0 = self.pos
            t = self.text
            if self.startswith("sum_"):
                if declared is not None or factors or cumulants or n_exp != 0:
                    self.error("the index declaration must come first")
                self.pos += 4
                declared = tuple(self.index_list())
                if len(set(declared)) != len(declared):
                    self.error("repeated index in declaration", p0)
                self.declared = declared
            elif self.startswith("N^"):
                self.pos += 2
                e = self.braced()
                if e.alpha or e.n:
                    self.error("N exponent may involve beta only", p0)
                n_exp = n_exp + e
            elif self.startswith("q^"):
                self.pos += 2
                e = self.braced()
                if not e.is_constant:
                    self.error("q exponent must be a constant", p0)
                q_exp += e.const
            elif t[self.pos] == "C" and self.pos + 1 < len(t) and t[self.pos + 1].isdigit():
                m = re.compile(r"C(\d+)").match(t, self.pos)
                k = int(m.group(1))
                if k < 2:
                    self.error("cumulant order must be at least 2", p0)
                self.pos = m.end()
                cumulants.append(k)
            elif self.startswith("["):
                factors.append(self.bracket())
            elif self.startswith("<"):
                if seen_centered:
                    self.error("at most one centred product '<...>' is allowed")
                seen_centered = True
                factors.append(self.centered())
            elif self.startswith("G"):
                factors.append(self.green_power())
            elif self.startswith("1") and (self.pos + 1 == len(t) or not t[self.pos + 1].isdigit()):
                self.pos += 1  # explicit unit
            else:
                self.error(f"unexpected input {t[self.pos]!r}")
        return FormalMonomial(n_exponent=n_exp, q_exponent=q_exp, cumulants=tuple(cumulants),
                              factors=tuple(factors), declared=declared)


def parse(text: str) -> FormalMonomial:
    """Parse a monomial string; raises :class:`ParseError` with a position."""
    if not isinstance(text, str):
        raise ParseError("monomial must be a string")
    return _Parser(text).monomial()


def classes(m: FormalMonomial) -> frozenset:
    """All classes among ``{U, V, W}`` that contain ``m``."""
    c = m.centered
    if c is None:
        out = {"U"}
        if all(e.power in (1, 2) for e in m.entries):
            out.add("V")
        return frozenset(out)
    if any(isinstance(f, GreenPower) for f in m.factors):
        return frozenset()
    return frozenset({"W"})


def classify(m: FormalMonomial) -> str:
    """Most specific class tag: ``"V"`` (which implies ``"U"``), ``"U"`` or ``"W"``."""
    cs = classes(m)
    if not cs:
        raise ClassificationError(
            f"{m}: a centred product may only be combined with [Y] factors; "
            "entries outside '<...>' fit none of U, V, W")
    for tag in ("V", "U", "W"):
        if tag in cs:
            return tag
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class ExponentProfile:
    cls: str
    nu0: int
    nu1: Affine
    nu2: int
    nu3: int
    nu3_tilde: int
    nu3_raw: int
    nu4: Affine
    b0: Affine
    b1: Affine
    b2: Affine

    def to_dict(self) -> dict:
        return {k: (str(v) if isinstance(v, Affine) else v) for k, v in self.__dict__.items()}


def profile(m: FormalMonomial) -> ExponentProfile:
    """nu-maps and the exponents ``b0``, ``b1``, ``b2``.

    ``nu3`` is capped at 2; ``nu3_raw`` keeps the uncapped off-diagonal count.
    All three exponents are returned; which one is meaningful depends on the
    class (``b0``/``b2`` for U and V, ``b1`` for W).
    """
    cls = classify(m)
    nu0 = len(m.indices)
    nu1 = m.nu1
    entries = m.entries
    nu2 = sum(e.power - 1 for e in entries)
    raw = sum(1 for e in entries if e.off_diagonal)
    nu3 = min(2, raw)
    nu4 = Affine()
    for b in m.brackets:
        nu4 = nu4 + b.power
    half = Affine(Fraction(-1, 2), alpha=Fraction(1, 2))
    b1 = Affine(nu0) - nu1 + half * nu3
    b0 = b1 + Affine(alpha=nu2)
    b2 = Affine(nu0) - nu1 + Affine(alpha=nu2) - 1
    return ExponentProfile(cls=cls, nu0=nu0, nu1=nu1, nu2=nu2, nu3=nu3, nu3_tilde=2 - nu3,
                           nu3_raw=raw, nu4=nu4, b0=b0, b1=b1, b2=b2)


# -- bound expressions -----------------------------------------------------------

# Extra factors: ("one",), ("eta",), ("eta/q",), ("inv_sqrtN_q",), ("M",),
# ("neta_pow", r) meaning (N eta)^(-r).

def _atom_str(a):
    kind = a[0]
    if kind == "neta_pow":
        return f"(N*eta)^(-{a[1]})"
    return {"one": "1", "eta": "eta", "eta/q": "eta/q", "inv_sqrtN_q": "1/(sqrt(N)*q)", "M": "M"}[kind]


@dataclass(frozen=True)
class BoundTerm:
    """``N^{n_exponent} (N eta)^{-neta_power} (sum of extra atoms) M^{m_power}``."""

    n_exponent: Affine
    neta_power: Affine
    extra: tuple
    m_power: Affine

    def __str__(self):
        s = f"N^{{{self.n_exponent}}}"
        if self.neta_power != 0:
            s += f" (N*eta)^(-({self.neta_power}))"
        if self.extra != (("one",),):
            s += " (" + " + ".join(_atom_str(a) for a in self.extra) + ")"
        if self.m_power != 0:
            s += f" M^{{{self.m_power}}}"
        return s


@dataclass(frozen=True)
class BoundSum:
    """``sum_{k=k_start}^{k_stop} N^{e} (N eta)^{-k} (extra) M^{m_base - k}``."""

    k_start: int
    k_stop: Affine
    n_exponent: Affine
    extra: tuple
    m_base: Affine

    def expand(self, n=None):
        stop = self.k_stop.substitute(n=n) if n is not None else self.k_stop
        if not stop.is_constant:
            raise PreconditionError("bind n to expand a symbolic sum")
        top = stop.const
        if top.denominator != 1:
            raise PreconditionError(f"summation bound {top} is not an integer")
        mb = self.m_base.substitute(n=n) if n is not None else self.m_base
        return [BoundTerm(self.n_exponent, Affine(k), self.extra, mb - k)
                for k in range(self.k_start, int(top) + 1)]

    def __str__(self):
        inner = " + ".join(_atom_str(a) for a in self.extra)
        return (f"sum_{{k={self.k_start}}}^{{{self.k_stop}}} N^{{{self.n_exponent}}} "
                f"(N*eta)^(-k) ({inner}) M^{{{self.m_base}-k}}")


@dataclass(frozen=True)
class BoundExpr:
    lemma: str
    terms: tuple
    sums: tuple = ()

    def expand(self, n=None) -> "BoundExpr":
        """Replace symbolic sums by explicit terms (``n`` binds the moment order)."""
        terms = []
        for t in self.terms:
            if n is not None:
                t = BoundTerm(t.n_exponent, t.neta_power.substitute(n=n), t.extra, t.m_power.substitute(n=n))
            terms.append(t)
        for s in self.sums:
            terms.extend(s.expand(n))
        return BoundExpr(self.lemma, tuple(terms), ())

    def __str__(self):
        return " + ".join([str(t) for t in self.terms] + [str(s) for s in self.sums])


LEMMAS = ("L4.2", "L4.3", "L4.4", "L4.5", "lemH")
_LEMMA_ALIASES = {"l4.2": "L4.2", "4.2": "L4.2", "l4.3": "L4.3", "4.3": "L4.3", "l4.4": "L4.4",
                  "4.4": "L4.4", "l4.5": "L4.5", "4.5": "L4.5", "lemh": "lemH", "h": "lemH"}

_ONE = (("one",),)


def bound(m, lemma: str) -> BoundExpr:
    """Bound expression for ``sum E m`` from the chosen lemma."""
    mono = parse(m) if isinstance(m, str) else m
    key = _LEMMA_ALIASES.get(str(lemma).lower())
    if key is None:
        raise PreconditionError(f"unknown lemma {lemma!r}; choose from {LEMMAS}")
    prof = profile(mono)
    cls = prof.cls
    nu4 = prof.nu4
    x = ("neta_pow", Fraction(prof.nu3_tilde, 2))
    if key in ("L4.2", "L4.3", "lemH") and cls not in ("U", "V"):
        raise PreconditionError(f"{key} applies to class U/V monomials, got {cls}")
    if key in ("L4.4", "L4.5") and cls != "W":
        raise PreconditionError(f"{key} applies to class W monomials, got {cls}")
    if key == "L4.2":
        return BoundExpr(key, (BoundTerm(prof.b0, Affine(), _ONE, nu4),))
    if key == "L4.3":
        if cls != "V":
            raise PreconditionError("L4.3 requires a class V monomial")
        if prof.nu2 < 1:
            raise PreconditionError("L4.3 requires nu2 >= 1")
        lead = BoundTerm(prof.b0, Affine(), _ONE, nu4 + 1)
        tail = BoundSum(0, nu4, prof.b0, (("eta",), x), nu4)
        return BoundExpr(key, (lead,), (tail,))
    if key == "L4.4":
        return BoundExpr(key, (BoundTerm(prof.b1, Affine(), _ONE, nu4),))
    if key == "L4.5":
        lead = BoundTerm(prof.b1, Affine(), (x, ("inv_sqrtN_q",), ("M",)), nu4)
        tail = BoundSum(1, nu4, prof.b1, (("eta/q",), x), nu4)
        return BoundExpr(key, (lead,), (tail,))
    tail = BoundSum(0, nu4, prof.b2, _ONE, nu4)
    return BoundExpr(key, (), (tail,))


def _atom_value(a, N, eta, q, M):
    kind = a[0]
    if kind == "one":
        return 1.0
    if kind == "eta":
        return eta
    if kind == "eta/q":
        return eta / q
    if kind == "inv_sqrtN_q":
        return 1.0 / (math.sqrt(N) * q)
    if kind == "M":
        return M
    if kind == "neta_pow":
        return (N * eta) ** (-float(a[1]))
    raise ValueError(f"unknown atom {a!r}")


def evaluate(expr: BoundExpr, N, alpha: float, beta: float, m_value: float, n=None) -> float:
    """Numeric value at ``eta = N^-alpha``, ``q = N^beta`` and ``M = m_value``."""
    if N <= 1 or not 0 <= alpha <= 1 or not 0 < beta < 0.5 or m_value <= 0:
        raise DomainError("need N > 1, alpha in [0, 1], beta in (0, 1/2), M > 0")
    full = expr.expand(n)
    eta = float(N) ** (-alpha)
    q = float(N) ** beta
    logN = math.log(N)
    total = 0.0
    for t in full.terms:
        e = t.n_exponent.value(alpha, beta, n)
        k = t.neta_power.value(alpha, beta, n)
        mp = t.m_power.value(alpha, beta, n)
        extra = sum(_atom_value(a, N, eta, q, m_value) for a in t.extra)
        total += math.exp(e * logN) * (N * eta) ** (-k) * extra * m_value**mp
    return total


# -- recursion ---------------------------------------------------------------------

@dataclass(frozen=True)
class RecursionRecord:
    """Exponent comparison for one step of the expansion hierarchy.

    ``log_ratio`` is ``log_N(I(child) / I(parent))``; ``required`` is the
    exponent the inequality allows. The step contracts iff ``gain >= beta``.
    """

    kind: str
    log_ratio: Affine
    required: Affine
    gain: Affine
    alpha: float | None
    beta: float
    gain_value: float | None
    holds: bool | None


def _half_neta(d: int) -> Affine:
    # exponent of (N eta)^{d/2} with N eta = N^{1 - alpha}
    return Affine(1, alpha=-1) * Fraction(d, 2)


def recursion_step(parent: ExponentProfile, child: ExponentProfile, beta: float,
                   alpha: float | None = None, n=None) -> RecursionRecord:
    """Check ``I(child) <= I(parent) (N eta)^{(nu3~(child) - nu3~(parent))/2} N^{-beta}``.

    With ``N eta = N^{1-alpha}`` the inequality is ``gain >= beta`` where
    ``gain = (1-alpha)(nu3~c - nu3~p)/2 - log_N(I(child)/I(parent))``.
    U/V profiles use ``b0`` and the nu4 correction; W profiles use ``b1`` and
    need equal ``nu4``. ``gain_value``/``holds`` are filled in when the gain
    can be evaluated (``alpha`` given, or the gain is free of ``alpha``).
    """
    if (parent.cls == "W") != (child.cls == "W"):
        raise PreconditionError("parent and child must both be W or both be U/V")
    is_w = parent.cls == "W"
    if child.nu3 < parent.nu3:
        raise PreconditionError(f"nu3 must not decrease (parent {parent.nu3}, child {child.nu3})")
    d4 = child.nu4 - parent.nu4
    if n is not None:
        d4 = d4.substitute(n=n)
    if not d4.is_constant:
        raise PreconditionError("nu4 difference depends on n; pass n=...")
    d4 = d4.const
    if is_w:
        if d4 != 0:
            raise PreconditionError("the W ratio is only defined for equal nu4")
        log_ratio = child.b1 - parent.b1
    else:
        if d4 > 0:
            raise PreconditionError(f"nu4 must not increase (parent {parent.nu4}, child {child.nu4})")
        if child.nu2 < 1:
            raise PreconditionError("hierarchy children must have nu2 >= 1")
        # log_N I(V*) = b0(V*) + (1 - alpha)(nu4(V) - nu4(V*)) - b0(V) + 1
        log_ratio = child.b0 - parent.b0 - Affine(1, alpha=-1) * d4
    half = _half_neta(child.nu3_tilde - parent.nu3_tilde)
    required = half - Affine(beta=1)
    gain = half - log_ratio
    b = _frac(beta)
    gain_value = holds = None
    if alpha is not None or gain.alpha == 0:
        g = gain.substitute(alpha=0 if alpha is None else alpha, beta=b)
        gain_value = float(g.const)
        holds = g.const >= b
    return RecursionRecord(kind="W" if is_w else "V", log_ratio=log_ratio, required=required,
                           gain=gain, alpha=alpha, beta=float(beta), gain_value=gain_value, holds=holds)


def steps_to_absorb(beta: float, delta_nu3_tilde: int = 0, alpha: float = 0.0) -> int:
    """Smallest ``s`` with ``s beta >= 1 + (1 - alpha) delta_nu3_tilde / 2``.

    ``I(root) = N`` and each step gains ``N^-beta``; the worst ``nu3~``
    change costs ``(N eta)^{delta/2}``.
    """
    b = _frac(beta)
    if b <= 0:
        raise DomainError("beta must be positive")
    need = 1 + (1 - _frac(alpha)) * Fraction(delta_nu3_tilde, 2)
    return max(0, math.ceil(need / b))
