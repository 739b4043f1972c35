"""Text syntax for expressions.

Grammar::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := rational ['*'] factor ('*' factor)* | rational | factor ('*' factor)*
    factor := IDENT | KEYWORD '(' args ')' | '(' expr ')'

Keywords: ``delta d D s dH iota tr bracket intS intC intM onshell flat
vertical stokes gauge expandF curv``.  ``iota(X, e)`` contracts with the
fundamental field of ``X``; ``curv()`` is the expanded field-space curvature.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional

from . import calculus as calc
from .algebra import (
    ADJOINT, SCALAR, AlgebraError, Expression, Registry, Trace, DEFAULT_REGISTRY, atom,
    bracket, const, mul, trace,
)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*(),])
""", re.VERBOSE)


class DSLError(AlgebraError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line, self.column = line, column
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{where}")


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int
    pos: int = 0


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, col, pos))
        for ch in chunk:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    tokens.append(Token("eof", "", line, col, pos))
    return tokens


class Parser:
    def __init__(self, text: str, registry: Registry = DEFAULT_REGISTRY,
                 env: Optional[Mapping[str, Expression]] = None):
        self.tokens = tokenize(text)
        self.i = 0
        self.registry = registry
        self.env = dict(env or {})
        self.ym = calc.YM.of(registry) if all(s in registry for s in "AEw") else None

    # -- token helpers --------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text:
            self.fail(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.advance()

    def fail(self, message: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise DSLError(message, t.line, t.column)

    # -- grammar --------------------------------------------------------
    def parse(self) -> Expression:
        e = self.expr()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expression:
        sgn = 1
        if self.tok.text in "+-" and self.tok.kind == "op":
            sgn = -1 if self.advance().text == "-" else 1
        total = self.term().scale(sgn)
        while self.tok.kind == "op" and self.tok.text in "+-":
            optok = self.advance()
            t = self.term()
            try:
                total = total + t if optok.text == "+" else total - t
            except AlgebraError as exc:
                self.fail(str(exc), optok)
        return total

    def term(self) -> Expression:
        coeff = Fraction(1)
        factors: list[Expression] = []
        if self.tok.kind == "num":
            coeff = Fraction(self.advance().text)
            if self.tok.text == "*":
                self.advance()
            elif not self._starts_factor():
                return const(coeff)
        factors.append(self.factor())
        while self.tok.text == "*":
            self.advance()
            factors.append(self.factor())
        # parenthesised numbers such as (-1/2) act as coefficients
        for f in [f for f in factors if _number(f) is not None]:
            coeff *= _number(f)
            factors.remove(f)
        if not factors:
            return const(coeff)
        out = factors[0]
        for f in factors[1:]:
            out = mul(out, f)
        return out.scale(coeff)

    def _starts_factor(self) -> bool:
        return self.tok.kind == "ident" or self.tok.text == "("

    def factor(self) -> Expression:
        t = self.tok
        if t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "ident":
            self.fail(f"expected a factor, found {t.text or 'end of input'!r}")
        self.advance()
        name = t.text
        if self.tok.text == "(" and name in KEYWORDS:
            self.advance()
            args = []
            if self.tok.text != ")":
                args.append(self._first_arg(name))
                while self.tok.text == ",":
                    self.advance()
                    args.append(self.expr())
            self.expect(")")
            self.keyword_token = t
            try:
                return KEYWORDS[name](self, args)
            except DSLError:
                raise
            except AlgebraError as exc:
                self.fail(f"{name}: {exc}", t)
        if name in self.env:
            return self.env[name]
        a = self.registry.get(name)
        if a is None:
            self.fail(f"undeclared atom {name!r}", t)
        return atom(a)

    def _first_arg(self, keyword: str):
        if keyword == "iota":
            t = self.tok
            if t.kind != "ident" or t.text not in self.registry:
                self.fail("iota expects a declared gauge-parameter atom", t)
            self.advance()
            return self.registry[t.text]
        return self.expr()

    def need_ym(self) -> calc.YM:
        if self.ym is None:
            self.fail("Yang-Mills generators A, E, w are not declared")
        return self.ym


def _number(e: Expression) -> Optional[Fraction]:
    if len(e.terms) != 1:
        return None
    (key, c), = e.terms.items()
    if key.domain is None and not key.scalars and not key.word:
        return c
    return None


def _nargs(n):
    def deco(fn):
        def wrapped(p: Parser, args):
            if len(args) != n:
                p.fail(f"expected {n} argument(s), got {len(args)}", p.keyword_token)
            return fn(p, *args)
        return wrapped
    return deco


@_nargs(1)
def _kw_delta(p, e):
    return calc.delta(e)


@_nargs(1)
def _kw_d(p, e):
    return calc.d(e)


@_nargs(1)
def _kw_D(p, e):
    return calc.covariant_D(e, p.need_ym())


@_nargs(1)
def _kw_s(p, e):
    return calc.brst_s(e, p.need_ym())


@_nargs(1)
def _kw_dH(p, e):
    return calc.delta_H(e, p.need_ym())


@_nargs(2)
def _kw_iota(p, x, e):
    return calc.contract_fundamental(x, e, p.need_ym())


@_nargs(1)
def _kw_tr(p, e):
    return trace(e)


@_nargs(2)
def _kw_bracket(p, a, b):
    return bracket(a, b)


def _kw_int(domain):
    @_nargs(1)
    def fn(p, e):
        return calc.integrate(e, domain)
    return fn


@_nargs(1)
def _kw_onshell(p, e):
    return calc.onshell_reduce(e, p.need_ym())


@_nargs(1)
def _kw_flat(p, e):
    return calc.flat_reduce(e, p.need_ym())


@_nargs(1)
def _kw_vertical(p, e):
    return calc.vertical_reduce(e, p.need_ym())


@_nargs(1)
def _kw_stokes(p, e):
    return calc.stokes(e)


@_nargs(1)
def _kw_gauge(p, e):
    return calc.gauge_substitute(e, calc.GaugeSubstitution.of(p.registry), p.need_ym())


@_nargs(1)
def _kw_expandF(p, e):
    return calc.expand_curvature(e, p.need_ym())


@_nargs(0)
def _kw_curv(p):
    return calc.curvature(ym=p.need_ym())


KEYWORDS: dict[str, Callable] = {
    "delta": _kw_delta, "d": _kw_d, "D": _kw_D, "s": _kw_s, "dH": _kw_dH,
    "iota": _kw_iota, "tr": _kw_tr, "bracket": _kw_bracket,
    "intS": _kw_int("S"), "intC": _kw_int("C"), "intM": _kw_int("M"),
    "onshell": _kw_onshell, "flat": _kw_flat, "vertical": _kw_vertical,
    "stokes": _kw_stokes, "gauge": _kw_gauge, "expandF": _kw_expandF, "curv": _kw_curv,
}


def parse(text: str, registry: Registry = DEFAULT_REGISTRY,
          env: Optional[Mapping[str, Expression]] = None) -> Expression:
    return Parser(text, registry, env).parse()


# ---------------------------------------------------------------------------
# printing

_INT_NAMES = {"S": "intS", "C": "intC", "M": "intM"}


def _atom_text(a) -> str:
    text = a.symbol
    if a.d:
        text = f"d({text})"
    if a.delta:
        text = f"delta({text})"
    return text


def _factor_text(x) -> str:
    if isinstance(x, Trace):
        inner = "*".join(_atom_text(a) for a in x.word) or "1"
        return f"tr({inner})"
    return _atom_text(x)


def pretty(e: Expression) -> str:
    """Render an expression in DSL syntax (parses back to the same value)."""
    if e.is_zero():
        return "0"
    parts = []
    for key, c in e.terms.items():
        body = "*".join(_factor_text(x) for x in list(key.scalars) + list(key.word))
        if key.domain is not None:
            body = f"{_INT_NAMES[key.domain]}({body or '1'})"
        mag = abs(c)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        parts.append(("-" if c < 0 else "+", text))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sgn, text in parts[1:]:
        out += f" {sgn} {text}"
    return out
