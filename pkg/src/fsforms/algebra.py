"""Free bigraded algebra of matrix-valued forms.

Generators are :class:`Atom` objects carrying a bidegree ``(f, s)``: ``f`` is
the field-space form degree (ghost number), ``s`` the spacetime form degree.
Products of adjoint/group atoms are noncommutative matrix words; scalar atoms
and traces of words are graded-commutative and are pulled out in front.
Reordering two homogeneous objects of bidegrees ``p`` and ``q`` costs the
Koszul sign ``(-1)**(p.f*q.f + p.s*q.s)``.

Every :class:`Expression` is kept in canonical form: brackets expanded,
``b * b^-1`` pairs cancelled, traced words rotated to their minimal cyclic
representative, like terms merged and zero coefficients dropped.  Two
expressions are equal iff their term dictionaries are equal.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence, Union

ADJOINT = "adjoint"
GROUP = "group"
GROUP_INVERSE = "group-inverse"
SCALAR = "scalar"
VALUEDNESS = (ADJOINT, GROUP, GROUP_INVERSE, SCALAR)

# Integration domains and their dimension (D = 4 spacetime).
DOMAINS = {"S": 3, "C": 2, "M": 4}

Number = Union[int, Fraction]


class AlgebraError(ValueError):
    """Malformed algebraic input."""


class DegreeError(AlgebraError):
    """Inhomogeneous sum or degree/dimension mismatch."""


class ValuednessError(AlgebraError):
    """Operation applied to an expression of the wrong valuedness."""


class Bidegree(NamedTuple):
    f: int
    s: int

    def __add__(self, other):  # type: ignore[override]
        return Bidegree(self.f + other[0], self.s + other[1])

    def __sub__(self, other):
        return Bidegree(self.f - other[0], self.s - other[1])


ZERO_DEGREE = Bidegree(0, 0)


def koszul(p: Sequence[int], q: Sequence[int]) -> int:
    """Parity of the sign picked up when swapping objects of degree p and q."""
    return (p[0] * q[0] + p[1] * q[1]) & 1


def sign(parity: int) -> int:
    return -1 if parity & 1 else 1


@dataclass(frozen=True)
class Atom:
    """A generator, possibly hit by ``delta`` and/or ``d``.

    ``delta`` and ``d`` commute, so the pair of flags is unordered.
    ``inverse_of`` is set only on group-inverse atoms and points at the
    group atom they invert.  ``constant`` marks field-independent atoms
    (gauge parameters), for which ``delta`` vanishes.
    """

    symbol: str
    base: Bidegree
    valuedness: str = ADJOINT
    delta: bool = False
    d: bool = False
    inverse_of: Optional["Atom"] = field(default=None, compare=True)
    constant: bool = False

    @property
    def degree(self) -> Bidegree:
        return Bidegree(self.base.f + int(self.delta), self.base.s + int(self.d))

    @property
    def is_scalar(self) -> bool:
        return self.valuedness == SCALAR

    @property
    def bare(self) -> "Atom":
        return self.with_flags(False, False)

    def with_flags(self, delta: bool, d: bool) -> "Atom":
        return Atom(self.symbol, self.base, self.valuedness, delta, d,
                    self.inverse_of, self.constant)

    def sort_key(self) -> tuple:
        return (self.symbol, self.delta, self.d)

    def __repr__(self) -> str:
        text = self.symbol
        if self.d:
            text = f"d({text})"
        if self.delta:
            text = f"delta({text})"
        return text


class Trace(NamedTuple):
    """A traced (closed) word; always stored in minimal cyclic rotation."""

    word: tuple

    @property
    def degree(self) -> Bidegree:
        return word_degree(self.word)

    def sort_key(self) -> tuple:
        return (1, tuple(a.sort_key() for a in self.word))


def word_degree(word: Iterable[Atom]) -> Bidegree:
    f = s = 0
    for a in word:
        deg = a.degree
        f += deg.f
        s += deg.s
    return Bidegree(f, s)


def _factor_degree(x) -> Bidegree:
    return x.degree


def _factor_key(x) -> tuple:
    if isinstance(x, Trace):
        return x.sort_key()
    return (0, x.sort_key())


class TermKey(NamedTuple):
    """Identity of a monomial: integration domain, scalar prefix, open word."""

    domain: Optional[str]
    scalars: tuple
    word: tuple

    @property
    def integrand_degree(self) -> Bidegree:
        deg = ZERO_DEGREE
        for x in self.scalars:
            deg = deg + x.degree
        return deg + word_degree(self.word)

    @property
    def degree(self) -> Bidegree:
        deg = self.integrand_degree
        if self.domain is not None:
            deg = Bidegree(deg.f, deg.s - DOMAINS[self.domain])
        return deg

    def atoms(self) -> Iterator[Atom]:
        for x in self.scalars:
            if isinstance(x, Trace):
                yield from x.word
            else:
                yield x
        yield from self.word


# ---------------------------------------------------------------------------
# word-level normalisation


def _cancels(left: Atom, right: Atom) -> bool:
    if left.delta or left.d or right.delta or right.d:
        return False
    if left.valuedness == GROUP and right.valuedness == GROUP_INVERSE:
        return right.inverse_of is not None and right.inverse_of.bare == left.bare
    if left.valuedness == GROUP_INVERSE and right.valuedness == GROUP:
        return left.inverse_of is not None and left.inverse_of.bare == right.bare
    return False


def cancel_group_pairs(word: Sequence[Atom], rng: Optional[random.Random] = None) -> tuple:
    """Remove adjacent ``b b^-1`` / ``b^-1 b`` pairs until none remain.

    With ``rng`` the pair to cancel is picked at random each step; the result
    does not depend on the choice (used to test confluence).
    """
    w = list(word)
    while True:
        spots = [i for i in range(len(w) - 1) if _cancels(w[i], w[i + 1])]
        if not spots:
            return tuple(w)
        i = rng.choice(spots) if rng is not None else spots[0]
        del w[i:i + 2]


def rotate(word: Sequence[Atom], k: int) -> tuple[tuple, int]:
    """Move the first ``k`` factors of a traced word to the back.

    Returns the rotated word and the sign of the move.
    """
    k %= max(len(word), 1)
    head, tail = tuple(word[:k]), tuple(word[k:])
    return tail + head, sign(koszul(word_degree(head), word_degree(tail)))


def canonical_trace(word: Sequence[Atom], rng: Optional[random.Random] = None) -> tuple[tuple, int]:
    """Minimal cyclic representative of a traced word and the sign to reach it.

    A sign of 0 means the trace vanishes identically (a rotation maps the
    word onto itself with a minus sign).
    """
    w = cancel_group_pairs(word, rng)
    acc = 1
    # cyclic cancellation across the seam
    while len(w) >= 2 and _cancels(w[-1], w[0]):
        w, sgn = rotate(w, len(w) - 1)
        acc *= sgn
        w = cancel_group_pairs(w, rng)
    n = len(w)
    if n <= 1:
        return tuple(w), acc
    best = None
    best_signs: set[int] = set()
    for k in range(n):
        rw, sgn = rotate(w, k)
        key = tuple(a.sort_key() for a in rw)
        if best is None or key < best[0]:
            best = (key, rw)
            best_signs = {sgn}
        elif key == best[0]:
            best_signs.add(sgn)
    if len(best_signs) > 1:
        return best[1], 0
    return best[1], acc * best_signs.pop()


def _sort_scalars(items: list) -> tuple[tuple, int]:
    """Graded-commutative sort; sign 0 if an odd factor repeats."""
    items = list(items)
    sgn = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and _factor_key(items[j - 1]) > _factor_key(items[j]):
            sgn *= sign(koszul(items[j - 1].degree, items[j].degree))
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b and koszul(a.degree, a.degree):
            return tuple(items), 0
    return tuple(items), sgn


def normalize_factors(factors: Sequence, rng: Optional[random.Random] = None) -> tuple[tuple, tuple, int]:
    """Split an ordered product into (scalars, word, sign).

    ``factors`` may mix matrix atoms, scalar atoms and :class:`Trace` objects.
    Scalar-like factors are moved to the front (paying Koszul signs for the
    matrix atoms they pass) and sorted; the matrix word is group-reduced.
    """
    scalars = []
    word = []
    sgn = 1
    word_deg = ZERO_DEGREE
    for x in factors:
        if isinstance(x, Trace) or x.is_scalar:
            sgn *= sign(koszul(x.degree, word_deg))
            scalars.append(x)
        else:
            word.append(x)
            word_deg = word_deg + x.degree
    sc, s2 = _sort_scalars(scalars)
    return sc, cancel_group_pairs(word, rng), sgn * s2


# ---------------------------------------------------------------------------
# expressions


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise AlgebraError(f"coefficients must be exact rationals, got {c!r}")


class Expression:
    """An immutable, canonical rational-linear combination of monomials."""

    __slots__ = ("terms", "valuedness", "bidegree", "_hash")

    def __init__(self, terms: Mapping[TermKey, Fraction], valuedness: str,
                 bidegree: Optional[Bidegree] = None):
        clean = {}
        for key, c in terms.items():
            if c:
                clean[key] = c
        degree = bidegree
        for key in clean:
            kd = key.degree
            if degree is None:
                degree = kd
            elif kd != degree:
                raise DegreeError(
                    f"inhomogeneous sum: bidegree {tuple(kd)} next to {tuple(degree)}")
        if valuedness not in (ADJOINT, SCALAR):
            raise AlgebraError(f"bad expression valuedness {valuedness!r}")
        if valuedness == SCALAR and any(k.word for k in clean):
            raise ValuednessError("scalar expression with an open matrix word")
        self.terms = dict(sorted(clean.items(), key=lambda kv: term_sort_key(kv[0])))
        self.valuedness = valuedness
        self.bidegree = degree
        self._hash = None

    # -- construction helpers -------------------------------------------
    @classmethod
    def zero(cls, valuedness: str = ADJOINT, bidegree: Optional[Bidegree] = None) -> "Expression":
        return cls({}, valuedness, bidegree)

    @classmethod
    def from_factors(cls, factors: Sequence, coeff: Number = 1, domain: Optional[str] = None,
                     valuedness: Optional[str] = None) -> "Expression":
        scalars, word, sgn = normalize_factors(factors)
        if valuedness is None:
            valuedness = ADJOINT if any(
                not isinstance(x, Trace) and not x.is_scalar for x in factors) else SCALAR
        terms: dict[TermKey, Fraction] = {}
        if sgn:
            terms[TermKey(domain, scalars, word)] = _as_fraction(coeff) * sgn
        deg = word_degree(word)
        for x in scalars:
            deg = deg + x.degree
        if domain is not None:
            deg = Bidegree(deg.f, deg.s - DOMAINS[domain])
        return cls(terms, valuedness, deg)

    # -- basic queries --------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def atoms(self) -> set[Atom]:
        out = set()
        for key in self.terms:
            out.update(key.atoms())
        return out

    # -- arithmetic -----------------------------------------------------
    def _combine(self, other: "Expression", factor: int) -> "Expression":
        if not isinstance(other, Expression):
            return NotImplemented
        valuedness = _merge_valuedness(self, other)
        deg = _merge_degree(self.bidegree, other.bidegree)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, Fraction(0)) + factor * c
        return Expression(terms, valuedness, deg)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c: Number) -> "Expression":
        c = _as_fraction(c)
        return Expression({k: v * c for k, v in self.terms.items()}, self.valuedness, self.bidegree)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, Expression):
            return mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Expression):
            return NotImplemented
        if not self.terms and not other.terms:
            return True
        return self.valuedness == other.valuedness and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.valuedness, tuple(self.terms.items()))) if self.terms else 0
        return self._hash

    def __repr__(self) -> str:
        from .dsl import pretty
        return f"Expression({pretty(self)!r})"

    def __str__(self) -> str:
        from .dsl import pretty
        return pretty(self)


def term_sort_key(key: TermKey) -> tuple:
    return (key.domain or "",
            tuple(_factor_key(x) for x in key.scalars),
            tuple(a.sort_key() for a in key.word))


def _merge_valuedness(a: Expression, b: Expression) -> str:
    if a.valuedness != b.valuedness:
        # the zero expression adapts to its partner
        if a.is_zero() and a.bidegree is None:
            return b.valuedness
        if b.is_zero() and b.bidegree is None:
            return a.valuedness
        raise ValuednessError(f"cannot combine {a.valuedness} with {b.valuedness} expression")
    return a.valuedness


def _merge_degree(p: Optional[Bidegree], q: Optional[Bidegree]) -> Optional[Bidegree]:
    if p is None:
        return q
    if q is None or p == q:
        return p
    raise DegreeError(f"inhomogeneous sum: bidegree {tuple(p)} vs {tuple(q)}")


# ---------------------------------------------------------------------------
# primitive constructors


def atom(a: Atom) -> Expression:
    return Expression.from_factors([a])


def const(c: Number, valuedness: str = ADJOINT) -> Expression:
    """``c`` times the unit (identity matrix for adjoint valuedness)."""
    if not c:
        return Expression.zero(valuedness, None)
    return Expression({TermKey(None, (), ()): _as_fraction(c)}, valuedness, ZERO_DEGREE)


def _key_factors(key: TermKey) -> list:
    return list(key.scalars) + list(key.word)


def mul(a: Expression, b: Expression) -> Expression:
    """Graded product; matrix factors keep their order."""
    valuedness = ADJOINT if ADJOINT in (a.valuedness, b.valuedness) else SCALAR
    if a.bidegree is not None and b.bidegree is not None:
        deg: Optional[Bidegree] = a.bidegree + b.bidegree
    else:
        deg = None
    terms: dict[TermKey, Fraction] = {}
    for ka, ca in a.terms.items():
        if ka.domain is not None:
            raise AlgebraError("cannot multiply an integrated expression")
        for kb, cb in b.terms.items():
            if kb.domain is not None:
                raise AlgebraError("cannot multiply an integrated expression")
            # a-scalars, a-word, b-scalars, b-word: move b-scalars past a-word
            sgn = sign(koszul(word_degree(ka.word), _scalars_degree(kb.scalars)))
            scalars, sgn2 = _sort_scalars(list(ka.scalars) + list(kb.scalars))
            if not sgn2:
                continue
            word = cancel_group_pairs(ka.word + kb.word)
            key = TermKey(None, scalars, word)
            terms[key] = terms.get(key, Fraction(0)) + ca * cb * sgn * sgn2
    return Expression(terms, valuedness, deg)


def _scalars_degree(scalars) -> Bidegree:
    deg = ZERO_DEGREE
    for x in scalars:
        deg = deg + x.degree
    return deg


def product(*exprs: Expression) -> Expression:
    out = exprs[0]
    for e in exprs[1:]:
        out = mul(out, e)
    return out


def bracket(a: Expression, b: Expression) -> Expression:
    """Graded commutator ``ab - (-1)**k ba``."""
    for x in (a, b):
        if x.valuedness != ADJOINT:
            raise ValuednessError("bracket needs adjoint-valued operands")
    if a.is_zero() or b.is_zero():
        deg = a.bidegree + b.bidegree if a.bidegree is not None and b.bidegree is not None else None
        return Expression.zero(ADJOINT, deg)
    k = koszul(a.bidegree, b.bidegree)
    return mul(a, b) - mul(b, a).scale(sign(k))


def trace(a: Expression) -> Expression:
    """Close every open word into a trace; result is scalar-valued."""
    if a.valuedness != ADJOINT:
        raise ValuednessError("trace of a scalar expression")
    terms: dict[TermKey, Fraction] = {}
    for key, c in a.terms.items():
        word, sgn = canonical_trace(key.word)
        if not sgn:
            continue
        tr = Trace(word)
        scalars, sgn2 = _sort_scalars(list(key.scalars) + [tr])
        if not sgn2:
            continue
        nk = TermKey(key.domain, scalars, ())
        terms[nk] = terms.get(nk, Fraction(0)) + c * sgn * sgn2
    return Expression(terms, SCALAR, a.bidegree)


def canonicalize(a: Expression, rng: Optional[random.Random] = None) -> Expression:
    """Rebuild ``a`` from scratch.

    Expressions are canonical on construction, so this is the identity on
    well-formed values; it exists to re-derive the normal form (optionally
    with a randomised cancellation order) and to check idempotence.
    """
    terms: dict[TermKey, Fraction] = {}
    for key, c in a.terms.items():
        factors = []
        sgn = 1
        for x in key.scalars:
            if isinstance(x, Trace):
                w, s = canonical_trace(x.word, rng)
                sgn *= s
                factors.append(Trace(w))
            else:
                factors.append(x)
        if not sgn:
            continue
        scalars, word, s2 = normalize_factors(factors + list(key.word), rng)
        if not s2:
            continue
        nk = TermKey(key.domain, scalars, word)
        terms[nk] = terms.get(nk, Fraction(0)) + c * sgn * s2
    return Expression(terms, a.valuedness, a.bidegree)


def equals(a: Expression, b: Expression) -> bool:
    if a.valuedness != b.valuedness and not (a.is_zero() or b.is_zero()):
        raise ValuednessError(f"comparing {a.valuedness} with {b.valuedness} expression")
    if a.is_zero() and b.is_zero():
        return True
    if a.valuedness != b.valuedness:
        return False
    return (a - b).is_zero()


def term_expression(key: TermKey, coeff: Fraction, valuedness: str) -> Expression:
    return Expression({key: coeff}, valuedness, key.degree)


def split_terms(e: Expression) -> list[Expression]:
    return [term_expression(k, c, e.valuedness) for k, c in e.terms.items()]


def with_domain(e: Expression, domain: Optional[str]) -> Expression:
    """Attach (or, with ``None``, strip) the integration marker of every term."""
    terms = {TermKey(domain, k.scalars, k.word): c for k, c in e.terms.items()}
    deg = None
    if e.bidegree is not None:
        old = {k.domain for k in e.terms}
        if len(old) > 1:
            raise AlgebraError("expression mixes integration domains")
        shift = DOMAINS[old.pop()] if old and None not in old else 0
        deg = Bidegree(e.bidegree.f, e.bidegree.s + shift - (DOMAINS[domain] if domain else 0))
    return Expression(terms, e.valuedness, deg)


def by_domain(e: Expression) -> dict[Optional[str], Expression]:
    """Split an expression by integration domain (integrands keep the marker)."""
    parts: dict[Optional[str], dict] = {}
    for k, c in e.terms.items():
        parts.setdefault(k.domain, {})[k] = c
    return {dom: Expression(ts, e.valuedness, e.bidegree) for dom, ts in parts.items()}


# ---------------------------------------------------------------------------
# generator table


class Registry:
    """Table of declared generators, keyed by symbol.

    Written once at setup, read-only afterwards (call :meth:`freeze`).
    """

    def __init__(self):
        self._atoms: dict[str, Atom] = {}
        self._frozen = False

    def declare(self, symbol: str, bidegree: Sequence[int], valuedness: str = ADJOINT, *,
                inverse_of: Optional[str] = None, constant: bool = False) -> Atom:
        if self._frozen:
            raise AlgebraError("generator table is frozen")
        if symbol in self._atoms:
            raise AlgebraError(f"duplicate atom {symbol!r}")
        if valuedness not in VALUEDNESS:
            raise AlgebraError(f"unknown valuedness {valuedness!r}")
        if not symbol[:1].isalpha() or not symbol.replace("_", "a").isalnum():
            raise AlgebraError(f"bad identifier {symbol!r}")
        deg = Bidegree(*bidegree)
        if deg.f < 0 or deg.s < 0:
            raise AlgebraError("bidegrees are nonnegative")
        partner = None
        if valuedness in (GROUP, GROUP_INVERSE):
            if deg != ZERO_DEGREE:
                raise AlgebraError("group-valued atoms must have bidegree (0, 0)")
            if valuedness == GROUP_INVERSE:
                if inverse_of not in self._atoms or self._atoms[inverse_of].valuedness != GROUP:
                    raise AlgebraError("group-inverse atom needs a declared group atom")
                partner = self._atoms[inverse_of]
        elif inverse_of is not None:
            raise AlgebraError("only group-inverse atoms have an inverse_of")
        a = Atom(symbol, deg, valuedness, inverse_of=partner, constant=constant)
        self._atoms[symbol] = a
        return a

    def freeze(self) -> "Registry":
        self._frozen = True
        return self

    def __getitem__(self, symbol: str) -> Atom:
        return self._atoms[symbol]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._atoms

    def get(self, symbol: str) -> Optional[Atom]:
        return self._atoms.get(symbol)

    def __iter__(self):
        return iter(self._atoms.values())

    def __len__(self):
        return len(self._atoms)

    def inverse(self, group_atom: Atom) -> Atom:
        for a in self._atoms.values():
            if a.valuedness == GROUP_INVERSE and a.inverse_of == group_atom.bare:
                return a
        raise AlgebraError(f"no inverse declared for {group_atom.symbol!r}")


def ym_registry() -> Registry:
    """The Yang-Mills generator set used by the shipped suites.

    ``A`` connection (0,1), ``E`` electric field (0,2), ``w`` functional
    connection (1,0), ``F`` opaque field-space curvature (2,0), ``X``/``Y``
    field-independent gauge parameters (0,0), ``b``/``bi`` a field-dependent
    gauge transformation and its inverse.
    """
    reg = Registry()
    reg.declare("A", (0, 1))
    reg.declare("E", (0, 2))
    reg.declare("w", (1, 0))
    reg.declare("F", (2, 0))
    reg.declare("X", (0, 0), constant=True)
    reg.declare("Y", (0, 0), constant=True)
    reg.declare("b", (0, 0), GROUP)
    reg.declare("bi", (0, 0), GROUP_INVERSE, inverse_of="b")
    return reg.freeze()


DEFAULT_REGISTRY = ym_registry()
