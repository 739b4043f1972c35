"""Derivations and reductions on bigraded expressions.

Conventions (Yang-Mills):

* ``delta`` has bidegree (1, 0), ``d`` has (0, 1); both are graded
  derivations, nilpotent, and commute with each other.
* ``D(e) = d(e) + [A, e]``.
* The vertical operator ``s`` is a (1, 0) derivation with
  ``s A = D(w)``, ``s E = [E, w]``, ``s w = -1/2 [w, w]`` and, for every
  generator ``G``, ``s(delta_H G) = -[w, delta_H G]``: horizontal variations
  transform in the adjoint.  ``s`` commutes with ``d``.
* ``delta_H = delta - s``; the curvature is ``F = delta w + 1/2 [w, w]``.
* ``iota_X`` (contraction with the fundamental field of a field-independent
  ``X``) is a (-1, 0) derivation with ``iota w = X``, ``iota delta A = D X``,
  ``iota delta E = [E, X]``, ``iota delta w = [w, X]``; this makes
  ``delta_H A``, ``delta_H E`` and ``F`` horizontal.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

from .algebra import (
    ADJOINT, DOMAINS, GROUP, GROUP_INVERSE, AlgebraError, Atom, Bidegree, DegreeError,
    Expression, Registry, Trace, TermKey, ValuednessError, DEFAULT_REGISTRY, atom, bracket,
    koszul, mul, sign, trace, with_domain,
)

YANGMILLS = "yangmills"
DIFFEO = "diffeo"

AtomRule = Callable[[Atom], Optional[Expression]]


# ---------------------------------------------------------------------------
# generic machinery


def _rebuild(key: TermKey, coeff: Fraction, valuedness: str, replace) -> Expression:
    """Multiply the factor images of one monomial back together.

    ``replace(factor)`` returns an Expression for an atom or a trace.
    """
    out = None
    for x in list(key.scalars) + list(key.word):
        img = replace(x)
        out = img if out is None else mul(out, img)
    if out is None:
        out = Expression({TermKey(None, (), ()): Fraction(1)}, valuedness, Bidegree(0, 0))
    out = out.scale(coeff)
    if out.valuedness != valuedness:
        out = Expression(out.terms, valuedness, out.bidegree)
    if key.domain is not None:
        out = with_domain(out, key.domain)
    return out


def _factor_expr(x) -> Expression:
    if isinstance(x, Trace):
        return Expression.from_factors([x], valuedness="scalar")
    return atom(x)


def substitute(e: Expression, rule: AtomRule) -> Expression:
    """Replace atoms by expressions (``rule`` returns ``None`` to keep one)."""

    def replace(x):
        if isinstance(x, Trace):
            inner = None
            for a in x.word:
                img = rule(a)
                img = atom(a) if img is None else img
                inner = img if inner is None else mul(inner, img)
            if inner is None:
                return _factor_expr(x)
            return trace(inner)
        img = rule(x)
        return atom(x) if img is None else img

    total = None
    for key, c in e.terms.items():
        part = _rebuild(key, c, e.valuedness, replace)
        total = part if total is None else total + part
    if total is None:
        return Expression.zero(e.valuedness, e.bidegree)
    return total


def derivation(e: Expression, rule: AtomRule, degree: tuple[int, int]) -> Expression:
    """Extend an atom rule to a graded derivation of the given bidegree.

    Passing a factor ``x`` costs ``(-1)**koszul(degree, deg x)``.
    """
    out_deg = None
    if e.bidegree is not None:
        out_deg = Bidegree(e.bidegree.f + degree[0], e.bidegree.s + degree[1])
    total = Expression.zero(e.valuedness, out_deg)
    for key, c in e.terms.items():
        factors = list(key.scalars) + list(key.word)
        prefix_deg = (0, 0)
        for i, x in enumerate(factors):
            sgn = sign(koszul(degree, prefix_deg))
            if isinstance(x, Trace):
                img = _derive_trace(x, rule, degree)
            else:
                img = rule(x)
            if img is not None and not img.is_zero():
                pieces = [_factor_expr(y) for y in factors[:i]] + [img] + \
                         [_factor_expr(y) for y in factors[i + 1:]]
                prod = pieces[0]
                for p in pieces[1:]:
                    prod = mul(prod, p)
                prod = prod.scale(c * sgn)
                if prod.valuedness != e.valuedness:
                    prod = Expression(prod.terms, e.valuedness, prod.bidegree)
                if key.domain is not None:
                    prod = with_domain(prod, key.domain)
                total = total + prod
            xd = x.degree
            prefix_deg = (prefix_deg[0] + xd[0], prefix_deg[1] + xd[1])
    return total


def _derive_trace(x: Trace, rule: AtomRule, degree) -> Optional[Expression]:
    if not x.word:
        return None
    inner = Expression.from_factors(list(x.word), valuedness=ADJOINT)
    return trace(derivation(inner, rule, degree))


# ---------------------------------------------------------------------------
# delta and d


def _inverse_rule(a: Atom, op: Callable[[Expression], Expression]) -> Expression:
    """op(b^-1) = -b^-1 op(b) b^-1."""
    g = atom(a.inverse_of)
    bi = atom(a.bare)
    return -mul(mul(bi, op(g)), bi)


def _delta_rule(a: Atom) -> Optional[Expression]:
    if a.delta or a.constant:
        return Expression.zero(ADJOINT)
    if a.valuedness == GROUP_INVERSE:
        return _inverse_rule(a, delta)
    return atom(a.with_flags(True, a.d))


def _d_rule(a: Atom) -> Optional[Expression]:
    if a.d:
        return Expression.zero(ADJOINT)
    if a.valuedness == GROUP_INVERSE:
        return _inverse_rule(a, d)
    return atom(a.with_flags(a.delta, True))


def _fix_zero(rule):
    def wrapped(a):
        img = rule(a)
        if img is not None and img.is_zero():
            return Expression.zero(img.valuedness, None)
        return img
    return wrapped


def delta(e: Expression) -> Expression:
    """Field-space exterior derivative, bidegree (1, 0)."""
    return derivation(e, _fix_zero(_delta_rule), (1, 0))


def d(e: Expression) -> Expression:
    """Spacetime exterior derivative, bidegree (0, 1)."""
    for key in e.terms:
        if key.domain is not None:
            raise AlgebraError("d of an integrated expression")
    return derivation(e, _fix_zero(_d_rule), (0, 1))


# ---------------------------------------------------------------------------
# Yang-Mills operators


@dataclass(frozen=True)
class YM:
    """Handles on the Yang-Mills generators of a registry."""

    A: Atom
    E: Atom
    w: Atom
    F: Optional[Atom] = None

    @classmethod
    def of(cls, registry: Registry = DEFAULT_REGISTRY) -> "YM":
        return cls(registry["A"], registry["E"], registry["w"], registry.get("F"))


_YM = YM.of()


def covariant_D(e: Expression, ym: YM = _YM) -> Expression:
    """``D_A e = d e + [A, e]``."""
    if e.valuedness != ADJOINT:
        raise ValuednessError("covariant derivative of a non-adjoint expression")
    return d(e) + bracket(atom(ym.A), e)


def curvature(convention: str = YANGMILLS, ym: YM = _YM, opaque: bool = False) -> Expression:
    """Field-space curvature of ``w``.

    Yang-Mills: ``delta w + 1/2 [w, w]``.  The diffeomorphism convention
    (``delta w - 1/2 [w, w]``) is exposed but not exercised by any suite.
    """
    if opaque:
        if ym.F is None:
            raise AlgebraError("no opaque curvature atom declared")
        return atom(ym.F)
    w = atom(ym.w)
    half = Fraction(1, 2) if convention == YANGMILLS else Fraction(-1, 2)
    if convention not in (YANGMILLS, DIFFEO):
        raise AlgebraError(f"unknown convention {convention!r}")
    return delta(w) + bracket(w, w).scale(half)


def _apply_flags(expr: Expression, a: Atom) -> Expression:
    """Apply the ``d`` flag of ``a`` to an image of its base (delta handled by caller)."""
    return d(expr) if a.d else expr


def expand_curvature(e: Expression, ym: YM = _YM) -> Expression:
    """Replace the opaque curvature atom (and its derivatives) by its expansion."""
    if ym.F is None:
        return e

    def rule(a: Atom):
        if a.symbol != ym.F.symbol:
            return None
        img = curvature(ym=ym)
        if a.delta:
            img = delta(img)
        if a.d:
            img = d(img)
        return img

    return substitute(e, rule)


def _s_base(a: Atom, ym: YM) -> Expression:
    """s on an undifferentiated generator."""
    w = atom(ym.w)
    if a.constant:
        return Expression.zero(ADJOINT)
    if a.symbol == ym.A.symbol:
        return covariant_D(w, ym)
    if a.symbol == ym.E.symbol:
        return bracket(atom(ym.E), w)
    if a.symbol == ym.w.symbol:
        return bracket(w, w).scale(Fraction(-1, 2))
    if ym.F is not None and a.symbol == ym.F.symbol:
        return -bracket(w, atom(ym.F))
    raise AlgebraError(f"no vertical rule for atom {a.symbol!r}")


def _s_rule(ym: YM):
    @lru_cache(maxsize=None)
    def rule(a: Atom) -> Optional[Expression]:
        if a.valuedness in (GROUP, GROUP_INVERSE):
            raise AlgebraError(f"no vertical rule for group atom {a.symbol!r}")
        base = a.with_flags(False, False)
        if a.delta:
            if a.constant:
                img = Expression.zero(ADJOINT)
            else:
                # s(delta_H G) = -[w, delta_H G] with delta_H G = delta G - s G
                sg = _s_base(base, ym)
                horiz = atom(base.with_flags(True, False)) - sg
                img = -bracket(atom(ym.w), horiz) + brst_s(sg, ym)
        else:
            img = _s_base(base, ym)
        img = _apply_flags(img, a)
        if img.is_zero():
            return Expression.zero(ADJOINT, None)
        return img
    return rule


_S_RULES: dict = {}


def brst_s(e: Expression, ym: YM = _YM) -> Expression:
    """Vertical (BRST) derivative, a (1, 0) derivation."""
    rule = _S_RULES.get(ym)
    if rule is None:
        rule = _S_RULES[ym] = _s_rule(ym)
    return derivation(e, rule, (1, 0))


def delta_H(e: Expression, ym: YM = _YM) -> Expression:
    """Horizontal derivative ``delta - s``."""
    return delta(e) - brst_s(e, ym)


def contract_fundamental(X: Atom, e: Expression, ym: YM = _YM) -> Expression:
    """Contraction with the fundamental vector field of a constant ``X``."""
    if not X.constant or X.degree != (0, 0) or X.valuedness != ADJOINT:
        raise AlgebraError("contraction needs a field-independent (0,0) adjoint atom")
    if e.bidegree is not None and e.bidegree.f == 0:
        raise DegreeError("nothing to contract in a field-space 0-form")
    x = atom(X)
    w = atom(ym.w)

    def rule(a: Atom) -> Optional[Expression]:
        if a.valuedness in (GROUP, GROUP_INVERSE):
            raise AlgebraError(f"no contraction rule for group atom {a.symbol!r}")
        if a.symbol == ym.w.symbol:
            if a.delta:
                img = bracket(w, x)
            else:
                img = x
        elif not a.delta:
            return Expression.zero(ADJOINT, None)
        elif a.constant:
            return Expression.zero(ADJOINT, None)
        elif a.symbol == ym.A.symbol:
            img = covariant_D(x, ym)
        elif a.symbol == ym.E.symbol:
            img = bracket(atom(ym.E), x)
        elif ym.F is not None and a.symbol == ym.F.symbol:
            img = -bracket(x, atom(ym.F))
        else:
            raise AlgebraError(f"no contraction rule for atom {a.symbol!r}")
        img = _apply_flags(img, a)
        return img if not img.is_zero() else Expression.zero(ADJOINT, None)

    return derivation(e, rule, (-1, 0))


# ---------------------------------------------------------------------------
# gauge substitution


@dataclass(frozen=True)
class GaugeSubstitution:
    """Field-dependent gauge transformation by the group atom ``beta``.

    A -> b A b^-1 - (d b) b^-1,  E -> b E b^-1,  w -> b w b^-1 - (delta b) b^-1,
    F -> b F b^-1.
    """

    beta: Atom
    beta_inv: Atom

    @classmethod
    def of(cls, registry: Registry = DEFAULT_REGISTRY, symbol: str = "b") -> "GaugeSubstitution":
        if symbol not in registry:
            raise AlgebraError(f"undeclared group atom {symbol!r}")
        g = registry[symbol]
        if g.valuedness != GROUP:
            raise AlgebraError(f"{symbol!r} is not group-valued")
        return cls(g, registry.inverse(g))

    def image(self, a: Atom, ym: YM) -> Optional[Expression]:
        b, bi = atom(self.beta), atom(self.beta_inv)
        base = a.symbol
        if base == ym.A.symbol:
            img = mul(mul(b, atom(ym.A)), bi) - mul(d(b), bi)
        elif base == ym.E.symbol:
            img = mul(mul(b, atom(ym.E)), bi)
        elif base == ym.w.symbol:
            img = mul(mul(b, atom(ym.w)), bi) - mul(delta(b), bi)
        elif ym.F is not None and base == ym.F.symbol:
            img = mul(mul(b, atom(ym.F)), bi)
        else:
            return None
        if a.delta:
            img = delta(img)
        if a.d:
            img = d(img)
        return img


def gauge_substitute(e: Expression, which: Optional[GaugeSubstitution] = None,
                     ym: YM = _YM) -> Expression:
    which = which or GaugeSubstitution.of()
    return substitute(e, lambda a: which.image(a, ym))


# ---------------------------------------------------------------------------
# reductions


def onshell_reduce(e: Expression, ym: YM = _YM) -> Expression:
    """Impose the Gauss constraint ``d E = -[A, E]``."""

    def rule(a: Atom):
        if a.symbol != ym.E.symbol or not a.d:
            return None
        img = -bracket(atom(ym.A), atom(ym.E))
        return delta(img) if a.delta else img

    return substitute(e, rule)


def flat_reduce(e: Expression, ym: YM = _YM) -> Expression:
    """Impose flatness ``F = 0``, i.e. ``delta w = -1/2 [w, w]``."""
    w = atom(ym.w)

    def rule(a: Atom):
        if ym.F is not None and a.symbol == ym.F.symbol:
            return Expression.zero(ADJOINT, None)
        if a.symbol == ym.w.symbol and a.delta:
            img = bracket(w, w).scale(Fraction(-1, 2))
            return d(img) if a.d else img
        return None

    return substitute(e, rule)


def vertical_reduce(e: Expression, ym: YM = _YM) -> Expression:
    """Drop variations of the fields themselves (``delta A = delta E = 0``)."""

    def rule(a: Atom):
        if a.delta and a.symbol in (ym.A.symbol, ym.E.symbol):
            return Expression.zero(ADJOINT, None)
        return None

    return substitute(e, rule)


# ---------------------------------------------------------------------------
# integration and Stokes


def integrate(e: Expression, domain: str) -> Expression:
    if domain not in DOMAINS:
        raise AlgebraError(f"unknown domain {domain!r}")
    for key in e.terms:
        if key.domain is not None:
            raise AlgebraError("expression is already integrated")
    if e.bidegree is not None and e.bidegree.s != DOMAINS[domain]:
        raise DegreeError(
            f"integrand of spacetime degree {e.bidegree.s} on a {DOMAINS[domain]}-dimensional domain")
    return with_domain(e, domain)


def lift_corners(e: Expression) -> Expression:
    """Rewrite every corner integral as the bulk integral of its d."""
    parts = {}
    for key, c in e.terms.items():
        parts.setdefault(key.domain, {})[key] = c
    total = Expression.zero(e.valuedness, e.bidegree)
    for dom, terms in parts.items():
        part = Expression(terms, e.valuedness, e.bidegree)
        if dom == "C":
            part = with_domain(d(with_domain(part, None)), "S")
        total = total + part
    return total


def _d_count(key: TermKey) -> int:
    return sum(1 for a in key.atoms() if a.d)


def _candidates(key: TermKey) -> set:
    """Monomials whose d could produce ``key`` (un-d one d-flagged factor)."""
    out = set()
    factors = list(key.scalars) + list(key.word)
    for i, x in enumerate(factors):
        if isinstance(x, Trace):
            for j, a in enumerate(x.word):
                if a.d and a.valuedness != GROUP_INVERSE:
                    w = x.word[:j] + (a.with_flags(a.delta, False),) + x.word[j + 1:]
                    fs = factors[:i] + [Trace(w)] + factors[i + 1:]
                    out.add(tuple(fs))
        elif x.d:
            fs = factors[:i] + [x.with_flags(x.delta, False)] + factors[i + 1:]
            out.add(tuple(fs))
    return out


MAX_PRIMITIVE_LENGTH = 4


def _primitive_basis(integrand: Expression):
    """Closed set of candidate primitives and their d-images."""
    valuedness = integrand.valuedness
    seen: dict = {}
    todo = [k for k in integrand.terms]
    done_keys = set()
    while todo:
        key = todo.pop()
        if key in done_keys:
            continue
        done_keys.add(key)
        for fs in _candidates(key):
            n = sum(len(x.word) if isinstance(x, Trace) else 1 for x in fs)
            if n > MAX_PRIMITIVE_LENGTH:
                continue
            cand = Expression.from_factors(list(fs), valuedness=valuedness)
            if cand.is_zero():
                continue
            ckey = next(iter(cand.terms))
            if ckey in seen:
                continue
            prim = Expression({ckey: Fraction(1)}, valuedness, ckey.degree)
            image = d(prim)
            seen[ckey] = (prim, image)
            todo.extend(k for k in image.terms if k not in done_keys)
    return list(seen.values())


def _order(key: TermKey) -> tuple:
    from .algebra import term_sort_key
    return (_d_count(key), term_sort_key(key))


def exact_split(integrand: Expression) -> tuple[Expression, Expression]:
    """Split ``integrand = rest + d(primitive)``.

    ``rest`` is the normal form of the integrand modulo the span of d-images
    of candidate primitives, using a term order that eliminates terms with
    more d's first.  The split is unique for the chosen order, which makes
    :func:`stokes` idempotent.
    """
    basis = _primitive_basis(integrand)
    # reduced echelon form over the rationals: rows (vector, combination)
    rows: list[tuple[dict, dict]] = []
    for idx, (prim, image) in enumerate(basis):
        vec = dict(image.terms)
        comb = {idx: Fraction(1)}
        for pv, pc, piv in [(r[0], r[1], _pivot(r[0])) for r in rows]:
            if piv in vec:
                f = vec[piv] / pv[piv]
                _axpy(vec, pv, -f)
                _axpy(comb, pc, -f)
        if not vec:
            continue
        piv = _pivot(vec)
        # back-substitute into existing rows to keep the form reduced
        for r in rows:
            if piv in r[0]:
                f = r[0][piv] / vec[piv]
                _axpy(r[0], vec, -f)
                _axpy(r[1], comb, -f)
        rows.append((vec, comb))
    rest = dict(integrand.terms)
    prim_comb: dict = {}
    changed = True
    while changed:
        changed = False
        for vec, comb in rows:
            piv = _pivot(vec)
            if piv in rest:
                f = rest[piv] / vec[piv]
                _axpy(rest, vec, -f)
                _axpy(prim_comb, comb, f)
                changed = True
    deg = integrand.bidegree
    rest_e = Expression(rest, integrand.valuedness, deg)
    prim_deg = None if deg is None else Bidegree(deg.f, deg.s - 1)
    primitive = Expression.zero(integrand.valuedness, prim_deg)
    for idx, c in prim_comb.items():
        primitive = primitive + basis[idx][0].scale(c)
    return rest_e, primitive


def _pivot(vec: dict):
    return max(vec, key=_order)


def _axpy(target: dict, source: dict, f: Fraction) -> None:
    for k, v in source.items():
        nv = target.get(k, Fraction(0)) + f * v
        if nv:
            target[k] = nv
        else:
            target.pop(k, None)


def stokes(e: Expression) -> Expression:
    """Move exact bulk integrands to the corner; exact corner terms vanish."""
    total = Expression.zero(e.valuedness, e.bidegree)
    parts: dict = {}
    for key, c in e.terms.items():
        parts.setdefault(key.domain, {})[key] = c
    for dom, terms in parts.items():
        part = Expression(terms, e.valuedness, e.bidegree)
        if dom not in ("S", "C"):
            total = total + part
            continue
        integrand = with_domain(part, None)
        rest, primitive = exact_split(integrand)
        total = total + with_domain(rest, dom)
        if dom == "S" and not primitive.is_zero():
            # the corner primitive is only defined up to exact corner forms
            total = total + with_domain(exact_split(primitive)[0], "C")
    return total
