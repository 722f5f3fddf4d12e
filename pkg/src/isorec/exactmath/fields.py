"""Coefficient fields for the exact tower Q -> Q(t) -> Q(t)[u]/(u^2 - r(t)).

A field object bundles what the polynomial/series layers need without caring
about the element type: zero()/one(), coerce(), an exact derivation diff(),
a partial square root sqrt() returning None when no root exists in the field,
and to_str() for canonical printing.  Elements are plain values: Fraction
over Q, RatFn over Q(t), ExtElem over a quadratic extension.

Escalation up the tower is always explicit — nothing here invents new
algebraic numbers behind the caller's back.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .poly import Poly, poly_sqrt
from .ratfn import RatFn

_DIVISOR_BOUND = 10 ** 8


def _divisors(n):
    n = abs(n)
    if n == 0:
        return [1]
    if n > _DIVISOR_BOUND:
        # too big to sieve honestly; try only the cheap candidates
        return [1, n]
    out = set()
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.add(i)
            out.add(n // i)
        i += 1
    return sorted(out)


class RationalField:
    """The rationals, with Fraction elements."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    _ZERO = Fraction(0)
    _ONE = Fraction(1)

    def zero(self):
        return RationalField._ZERO

    def one(self):
        return RationalField._ONE

    def coerce(self, v):
        if isinstance(v, Fraction):
            return v
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, str):
            return Fraction(v)
        if isinstance(v, float):
            raise TypeError("floating point is not allowed in exact arithmetic")
        raise TypeError("cannot coerce %r into Q" % (v,))

    def diff(self, e):
        return Fraction(0)

    def sqrt(self, e):
        e = self.coerce(e)
        if e < 0:
            return None
        rn = math.isqrt(e.numerator)
        rd = math.isqrt(e.denominator)
        if rn * rn == e.numerator and rd * rd == e.denominator:
            return Fraction(rn, rd)
        return None

    def root_candidates(self, coeffs):
        """Rational-root candidates p/q for a polynomial over Q."""
        fracs = [self.coerce(c) for c in coeffs]
        lcm = 1
        for c in fracs:
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        ints = [int(c * lcm) for c in fracs]
        while ints and ints[0] == 0:
            ints.pop(0)
        if not ints:
            return
        for p in _divisors(ints[0]):
            for q in _divisors(ints[-1]):
                c = Fraction(p, q)
                yield c
                yield -c

    def to_str(self, e):
        return str(self.coerce(e))

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


QQ = RationalField()


class FunctionField:
    """Rational functions over a base field, e.g. Q(t).

    diff() differentiates in this field's own variable, which is the
    canonical derivation when the base consists of constants.  Deeper
    towers are for algebra only; don't differentiate through them.
    """

    def __init__(self, base, var):
        self.base = base
        self.var = var
        self._zero = None
        self._one = None

    def zero(self):
        # elements are immutable, so sharing the cached instance is safe
        if self._zero is None:
            self._zero = RatFn.zero(self.base, self.var)
        return self._zero

    def one(self):
        if self._one is None:
            self._one = RatFn.one(self.base, self.var)
        return self._one

    def gen(self):
        return RatFn.gen(self.base, self.var)

    def coerce(self, v):
        if isinstance(v, RatFn) and v.field == self.base and v.var == self.var:
            return v
        if isinstance(v, Poly) and v.field == self.base and v.var == self.var:
            return RatFn(v)
        return RatFn.const(self.base, self.base.coerce(v), self.var)

    def diff(self, e):
        return self.coerce(e).deriv()

    def sqrt(self, e):
        e = self.coerce(e)
        if not e:
            return e
        sn = poly_sqrt(e.num)
        if sn is None:
            return None
        sd = poly_sqrt(e.den)
        if sd is None:
            return None
        return RatFn(sn, sd)

    def to_str(self, e):
        return self.coerce(e).to_str(self.base.to_str)

    def __eq__(self, other):
        return (isinstance(other, FunctionField)
                and self.base == other.base and self.var == other.var)

    def __hash__(self):
        return hash(("FunctionField", self.base, self.var))

    def __repr__(self):
        return "%r(%s)" % (self.base, self.var)


class ExtElem:
    """a + b*u with u^2 = r, over the base of a QuadraticExtension."""

    __slots__ = ("field", "a", "b")

    def __init__(self, field, a, b):
        self.field = field
        self.a = a
        self.b = b

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def _coerce(self, other):
        try:
            return self.field.coerce(other)
        except (TypeError, ValueError):
            return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((str(self.a), str(self.b), self.field.uname))

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExtElem(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return ExtElem(self.field, -self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExtElem(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        r = self.field.r
        return ExtElem(self.field,
                       self.a * o.a + self.b * o.b * r,
                       self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverting zero")
        r = self.field.r
        n = self.a * self.a - self.b * self.b * r
        if not n:
            raise ZeroDivisionError(
                "norm vanishes: the extension modulus is a square")
        return ExtElem(self.field, self.a / n, -self.b / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conjugate(self):
        return ExtElem(self.field, self.a, -self.b)

    def __str__(self):
        return self.field.to_str(self)

    def __repr__(self):
        return self.field.to_str(self)


class QuadraticExtension:
    """base[u] / (u^2 - r) with the derivation extended by u' = r'/(2r) u."""

    def __init__(self, base, r, uname="u"):
        self.base = base
        self.r = base.coerce(r)
        if not self.r:
            raise ValueError("extension modulus must be nonzero")
        self.uname = uname
        two = base.coerce(2)
        self._du = base.diff(self.r) / (two * self.r)
        self._half = base.one() / two
        self._zero = ExtElem(self, base.zero(), base.zero())
        self._one = ExtElem(self, base.one(), base.zero())

    def zero(self):
        return self._zero

    def one(self):
        return self._one

    def u(self):
        return ExtElem(self, self.base.zero(), self.base.one())

    def coerce(self, v):
        if isinstance(v, ExtElem):
            if v.field == self:
                return v
            raise TypeError("element of a different extension")
        return ExtElem(self, self.base.coerce(v), self.base.zero())

    def diff(self, e):
        e = self.coerce(e)
        da = self.base.diff(e.a)
        db = self.base.diff(e.b)
        return ExtElem(self, da, db + e.b * self._du)

    def sqrt(self, e):
        e = self.coerce(e)
        if not e:
            return e
        if not e.b:
            s = self.base.sqrt(e.a)
            if s is not None:
                return ExtElem(self, s, self.base.zero())
            s = self.base.sqrt(e.a / self.r)
            if s is not None:
                return ExtElem(self, self.base.zero(), s)
            return None
        # (c + d u)^2 = e needs c^2 = (a ± sqrt(a^2 - b^2 r)) / 2, d = b/(2c)
        norm = e.a * e.a - e.b * e.b * self.r
        s = self.base.sqrt(norm)
        if s is None:
            return None
        for c2 in ((e.a + s) * self._half, (e.a - s) * self._half):
            if not c2:
                continue
            c = self.base.sqrt(c2)
            if c is not None and c:
                d = e.b * self._half / c
                cand = ExtElem(self, c, d)
                if cand * cand == e:
                    return cand
        return None

    def to_str(self, e):
        e = self.coerce(e)
        bs = self.base.to_str
        if not e.b:
            return bs(e.a)
        one = self.base.one()
        if e.b == one:
            upart = self.uname
        elif e.b == -one:
            upart = "-%s" % self.uname
        else:
            upart = "(%s)*%s" % (bs(e.b), self.uname)
        if not e.a:
            return upart
        s = "%s + %s" % (bs(e.a), upart)
        return s.replace("+ -", "- ")

    def __eq__(self, other):
        return (isinstance(other, QuadraticExtension)
                and self.base == other.base and self.uname == other.uname
                and self.r == other.r)

    def __hash__(self):
        return hash(("QuadraticExtension", self.base, self.uname,
                     str(self.r)))

    def __repr__(self):
        return "%r[%s^2=%s]" % (self.base, self.uname,
                                self.base.to_str(self.r))


# ---------------------------------------------------------------------------
# derivations along a chosen tower variable, and substitution


def partial_derivation(field, name):
    """The derivation d/d(name) on the given tower, as a callable on elements.

    Variables other than `name` are held fixed; a quadratic generator u is
    chained through u' = r'/(2r) u using the derivative of its modulus.
    """
    if isinstance(field, QuadraticExtension):
        if name == field.uname:
            raise ValueError("%s is algebraic, not an independent variable"
                             % name)
        dbase = partial_derivation(field.base, name)
        dr = dbase(field.r)
        du = dr / ((field.base.coerce(2)) * field.r)

        def d(e):
            e = field.coerce(e)
            return ExtElem(field, dbase(e.a), dbase(e.b) + e.b * du)
        return d
    if isinstance(field, FunctionField):
        if name == field.var:
            return lambda e: field.coerce(e).deriv()
        dbase = partial_derivation(field.base, name)
        return lambda e: field.coerce(e).tderiv(dbase)
    # constants below: everything is killed
    return lambda e: field.zero()


def substitute(elem, values, one):
    """Evaluate a tower element with every variable assigned a value.

    values maps variable names (function-field vars and quadratic generators)
    to elements of some common target ring; `one` is that ring's unit, used
    to lift bare rationals.  Division in the target ring must be available
    for denominators that appear.
    """
    if isinstance(elem, ExtElem):
        a = substitute(elem.a, values, one)
        b = substitute(elem.b, values, one)
        return a + b * values[elem.field.uname]
    if isinstance(elem, RatFn):
        x = values[elem.var]
        num = _subst_poly(elem.num, x, values, one)
        den = _subst_poly(elem.den, x, values, one)
        return num / den
    return elem * one


def _subst_poly(p, x, values, one):
    acc = None
    for c in reversed(p.coeffs):
        cv = substitute(c, values, one)
        acc = cv if acc is None else acc * x + cv
    return 0 * one if acc is None else acc


# ---------------------------------------------------------------------------
# element parsing


def _generators(field):
    """Map of variable names to elements, walked up the tower."""
    if isinstance(field, QuadraticExtension):
        gens = {name: field.coerce(g)
                for name, g in _generators(field.base).items()}
        gens[field.uname] = field.u()
        return gens
    if isinstance(field, FunctionField):
        gens = {name: field.coerce(g)
                for name, g in _generators(field.base).items()}
        gens[field.var] = field.gen()
        return gens
    return {}


def _tokenize(text):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", int(text[i:j])))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j]))
            i = j
            continue
        if text.startswith("**", i):
            tokens.append(("op", "^"))
            i += 2
            continue
        if ch in "+-*/^()":
            tokens.append(("op", ch))
            i += 1
            continue
        raise ValueError("unexpected character %r in %r" % (ch, text))
    return tokens


class _Parser:
    def __init__(self, tokens, field, gens):
        self.tokens = tokens
        self.pos = 0
        self.field = field
        self.gens = gens

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of expression")
        self.pos += 1
        return tok

    def expr(self):
        value = self.term()
        while True:
            tok = self.peek()
            if tok == ("op", "+"):
                self.take()
                value = value + self.term()
            elif tok == ("op", "-"):
                self.take()
                value = value - self.term()
            else:
                return value

    def term(self):
        value = self.factor()
        while True:
            tok = self.peek()
            if tok == ("op", "*"):
                self.take()
                value = value * self.factor()
            elif tok == ("op", "/"):
                self.take()
                value = value / self.factor()
            else:
                return value

    def factor(self):
        tok = self.peek()
        if tok == ("op", "-"):
            self.take()
            return -self.factor()
        if tok == ("op", "+"):
            self.take()
            return self.factor()
        value = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            kind, n = self.take()
            if kind != "int":
                raise ValueError("exponent must be an integer")
            value = value ** (sign * n)
        return value

    def atom(self):
        kind, val = self.take()
        if kind == "int":
            return self.field.coerce(val)
        if kind == "name":
            if val not in self.gens:
                raise ValueError("unknown symbol %r in this field tower" % val)
            return self.gens[val]
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("unbalanced parentheses")
            return inner
        raise ValueError("unexpected token %r" % ((kind, val),))


def parse_element(text, field):
    """Parse an arithmetic expression into an element of the given field.

    Understands integers, the tower's variable names, + - * / ^ (or **)
    and parentheses: "-(3/2)*t^2 + u/2" in Q(t)[u].
    """
    parser = _Parser(_tokenize(text), field, _generators(field))
    value = parser.expr()
    if parser.peek() is not None:
        raise ValueError("trailing input in %r" % text)
    return value
