"""Rational functions in one variable, plus the residue toolkit built on them.

A RatFn is a reduced fraction of two Poly values over the same coefficient
field: denominator monic, gcd(num, den) = 1, sign carried by the numerator.
Canonical form makes equality a syntactic check.

The module-level functions (local_expand, residue, partial_fractions,
residue_sum_check, roots_in_field) are the workhorses everything above this
layer uses to take residues without ever leaving exact arithmetic.
"""

from __future__ import annotations

from ..errors import IrreducibleDenominator, TruncationTooShort
from .poly import Poly, poly_gcd, squarefree_decomposition
from .series import INF, LocalSeries


class RatFn:
    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, Poly):
            raise TypeError("numerator must be a Poly")
        if den is None:
            den = Poly.one(num.field, num.var)
        if not isinstance(den, Poly):
            den = Poly.const(num.field, den, num.var)
        if num.field != den.field or num.var != den.var:
            raise ValueError("numerator and denominator disagree on field or variable")
        if not den:
            raise ZeroDivisionError("zero denominator")
        if num:
            if den.degree() == 0:
                c = den.leading()
                if c != num.field.one():
                    num = num / c
                den = Poly.one(num.field, num.var)
            else:
                if num.degree() > 0:
                    g = poly_gcd(num, den)
                    if g.degree() > 0:
                        num = num // g
                        den = den // g
                lc = den.leading()
                if lc != num.field.one():
                    num = num / lc
                    den = den / lc
        else:
            den = Poly.one(num.field, num.var)
        self.num = num
        self.den = den

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_poly(cls, p):
        return cls(p)

    @classmethod
    def const(cls, field, c, var):
        return cls(Poly.const(field, c, var))

    @classmethod
    def gen(cls, field, var):
        return cls(Poly.gen(field, var))

    @classmethod
    def zero(cls, field, var):
        return cls(Poly.zero(field, var))

    @classmethod
    def one(cls, field, var):
        return cls(Poly.one(field, var))

    # -- structure ---------------------------------------------------------

    @property
    def field(self):
        return self.num.field

    @property
    def var(self):
        return self.num.var

    def __bool__(self):
        return bool(self.num)

    def is_poly(self):
        return self.den.degree() == 0

    def as_poly(self):
        if not self.is_poly():
            raise ValueError("not a polynomial: %s" % self)
        return self.num

    def degree(self):
        """deg num - deg den; the zero function reports -1."""
        return self.num.degree() - self.den.degree()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.var, tuple(self.num.coeffs), tuple(self.den.coeffs)))

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RatFn):
            if other.field == self.field and other.var == self.var:
                return other
            # a rational function in another variable may still be a scalar
            # of our coefficient field; fall through to field coercion
        if isinstance(other, Poly) and other.field == self.field \
                and other.var == self.var:
            return RatFn(other)
        try:
            c = self.field.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return RatFn.const(self.field, c, self.var)

    def _lift_into(self, other):
        """Self as an element of another RatFn's ring, if its scalars allow.

        Needed because Python skips reflected dispatch for same-type
        operands: a scalar living deeper in the tower must climb up itself.
        """
        if isinstance(other, RatFn):
            lifted = other._coerce(self)
            if lifted is not NotImplemented:
                return lifted
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            s = self._lift_into(other)
            return NotImplemented if s is NotImplemented else s + other
        return RatFn(self.num * o.den + o.num * self.den,
                     self.den * o.den)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return RatFn(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            s = self._lift_into(other)
            return NotImplemented if s is NotImplemented else s - other
        return RatFn(self.num * o.den - o.num * self.den,
                     self.den * o.den)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            s = self._lift_into(other)
            return NotImplemented if s is NotImplemented else s * other
        return RatFn(self.num * o.num, self.den * o.den)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            s = self._lift_into(other)
            return NotImplemented if s is NotImplemented else s / other
        if not o:
            raise ZeroDivisionError("division by zero rational function")
        return RatFn(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self.inverse().__mul__(other)

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverting the zero rational function")
        return RatFn(self.den, self.num)

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFn(self.num ** n, self.den ** n)

    # -- calculus -----------------------------------------------------------

    def deriv(self):
        """Derivative in the main variable."""
        return RatFn(self.num.deriv() * self.den - self.num * self.den.deriv(),
                     self.den * self.den)

    def tderiv(self, derivation=None):
        """Derivative through the coefficients.

        Uses the field's own derivation by default; pass any map obeying the
        Leibniz rule to differentiate along another direction of the tower.
        """
        d = derivation if derivation is not None else self.field.diff
        nt = self.num.map_coeffs(d)
        dt = self.den.map_coeffs(d)
        return RatFn(nt * self.den - self.num * dt, self.den * self.den)

    def map_coeffs(self, fn, field=None):
        return RatFn(self.num.map_coeffs(fn, field),
                     self.den.map_coeffs(fn, field))

    def __call__(self, v):
        dv = self.den(v)
        if not dv:
            raise ZeroDivisionError("evaluation at a pole")
        return self.num(v) / dv

    # -- display ------------------------------------------------------------

    def to_str(self, fmt=str):
        n = self.num.to_str(fmt)
        if self.is_poly():
            return n
        return "(%s)/(%s)" % (n, self.den.to_str(fmt))

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return "RatFn(%s)" % self.to_str()


# ---------------------------------------------------------------------------
# root finding in the coefficient field


def _order_at(p, a):
    """Multiplicity of the root a in the polynomial p (0 if regular)."""
    field = p.field
    one = Poly(field, [-a, field.one()], p.var)
    n = 0
    while p and p.degree() >= 1:
        q, r = divmod(p, one)
        if r:
            break
        p = q
        n += 1
    return n


def _strip_root(p, a):
    """Divide out (x - a) as often as possible; return (quotient, order)."""
    field = p.field
    lin = Poly(field, [-a, field.one()], p.var)
    n = 0
    while p.degree() >= 1:
        q, r = divmod(p, lin)
        if r:
            break
        p = q
        n += 1
    return p, n


def _peel_roots(g, hints):
    """Strip every discoverable linear factor off a squarefree g.

    Returns (roots, leftover); leftover is constant iff g split fully."""
    field = g.field
    roots = []
    for h in hints:
        h = field.coerce(h)
        if g.degree() >= 1 and not g(h):
            g, _ = _strip_root(g, h)
            roots.append(h)
    # constant term zero means a root at the origin
    if g.degree() >= 1 and not g.constant():
        g, _ = _strip_root(g, field.zero())
        roots.append(field.zero())
    candidates = getattr(field, "root_candidates", None)
    if candidates is not None and g.degree() > 2:
        for c in candidates(g.coeffs):
            if g.degree() < 1:
                break
            if not g(c):
                g, _ = _strip_root(g, c)
                roots.append(c)
    if g.degree() == 1:
        roots.append(-g.coeff(0) / g.coeff(1))
        g = Poly.one(field, g.var)
    elif g.degree() == 2:
        a, b, c = g.coeff(2), g.coeff(1), g.coeff(0)
        four = field.coerce(4)
        disc = b * b - four * a * c
        s = field.sqrt(disc)
        if s is not None:
            two_a = (field.one() + field.one()) * a
            roots.append((-b + s) / two_a)
            roots.append((-b - s) / two_a)
            g = Poly.one(field, g.var)
    return roots, g


def _roots_of_squarefree(g, hints):
    """All roots of a squarefree polynomial, or raise IrreducibleDenominator."""
    roots, leftover = _peel_roots(g, hints)
    if leftover.degree() >= 1:
        raise IrreducibleDenominator(
            "factor %s does not split over the working field"
            % leftover.to_str())
    return roots


def split_linear_factors(p, hints=()):
    """Partial factorization: ([(root, mult), ...], rootless remainder).

    Unlike roots_in_field this never raises on irreducible factors; they
    are multiplied into the returned remainder polynomial instead.
    """
    field = p.field
    out = []
    rest = Poly.one(field, p.var)
    if p.degree() <= 0:
        return out, rest
    _, factors = squarefree_decomposition(p)
    for g, mult in factors:
        roots, leftover = _peel_roots(g, hints)
        out.extend((r, mult) for r in roots)
        if leftover.degree() >= 1:
            rest = rest * leftover ** mult
    out.sort(key=lambda rm: (field.to_str(rm[0]), rm[1]))
    return out, rest


def roots_in_field(p, hints=()):
    """Roots of p with multiplicities, as [(root, mult), ...].

    hints are candidate roots tried before any systematic search; the field
    may additionally expose root_candidates() (the rationals do, via the
    integer divisor test).  Raises IrreducibleDenominator when p does not
    split into linear factors over its own coefficient field.
    """
    if p.degree() <= 0:
        return []
    field = p.field
    out = []
    _, factors = squarefree_decomposition(p)
    for g, mult in factors:
        for r in _roots_of_squarefree(g, hints):
            out.append((r, mult))
    out.sort(key=lambda rm: (field.to_str(rm[0]), rm[1]))
    return out


# ---------------------------------------------------------------------------
# local expansion and residues


def local_expand(f, p, K):
    """Laurent window of f at p (finite or INF), exponents up to K inclusive.

    Exponents at INF count powers of 1/x.  Raises TruncationTooShort when K
    lies below the leading exponent, i.e. the requested window is empty.
    """
    field = f.field
    if not f:
        return LocalSeries(field, p, K + 1, [], K + 1)
    if p is INF:
        v = f.den.degree() - f.num.degree()
        nn = Poly(field, list(reversed(f.num.coeffs)), f.var)
        dd = Poly(field, list(reversed(f.den.coeffs)), f.var)
        a = field.zero()
    else:
        p = field.coerce(p)
        nn, an = _strip_root(f.num, p)
        dd, ad = _strip_root(f.den, p)
        v = an - ad
        a = p
    if K < v:
        if v < 0:
            raise TruncationTooShort(
                "window to order %s cannot hold a pole of order %s" % (K, -v))
        # the function vanishes to order v > K: the window is honestly zero
        return LocalSeries(field, p, K + 1, [], K + 1)
    terms = K - v + 1
    expand_at = field.zero() if p is INF else a
    ns = LocalSeries(field, p, 0, nn.taylor_at(expand_at, terms), terms)
    ds = LocalSeries(field, p, 0, dd.taylor_at(expand_at, terms), terms)
    return (ns * ds.inverse()).shift(v)


def residue(f, p):
    """Residue of f dx at p; at INF this is -(coefficient of 1/x)."""
    field = f.field
    if not f:
        return field.zero()
    if p is INF:
        v = f.den.degree() - f.num.degree()
        if v > 1:
            return field.zero()
        return -local_expand(f, INF, 1).coeff(1)
    p = field.coerce(p)
    an = _order_at(f.num, p)
    ad = _order_at(f.den, p)
    if an >= ad:
        return field.zero()
    return local_expand(f, p, -1).coeff(-1)


def partial_fractions(f, hints=()):
    """Split f into a polynomial part plus simple-pole terms.

    Returns (polypart, terms) where terms is a list of (pole, order, coeff)
    triples, sorted by pole then order, with zero coefficients dropped;
    recombine() inverts this exactly.  Raises IrreducibleDenominator when
    the denominator does not split over the field (hints are candidate
    poles to try first).
    """
    field = f.field
    polypart, rem = divmod(f.num, f.den)
    terms = []
    if f.den.degree() > 0 and rem:
        tail = RatFn(rem, f.den)
        for pole, mult in roots_in_field(f.den, hints):
            if _order_at(tail.den, pole) == 0:
                continue  # the reduced fraction lost this pole
            window = local_expand(tail, pole, -1)
            for j in range(1, mult + 1):
                c = window.coeff(-j)
                if c:
                    terms.append((pole, j, c))
    terms.sort(key=lambda t: (field.to_str(t[0]), t[1]))
    return polypart, terms


def recombine(polypart, terms):
    """Rebuild the RatFn described by a partial-fraction decomposition."""
    field, var = polypart.field, polypart.var
    total = RatFn(polypart)
    for pole, order, coeff in terms:
        lin = Poly(field, [-pole, field.one()], var)
        total = total + RatFn(Poly.const(field, coeff, var), lin ** order)
    return total


def residue_sum_check(f, hints=()):
    """Verify that the residues of f dx over all poles and INF sum to zero."""
    field = f.field
    total = residue(f, INF)
    for pole, _ in roots_in_field(f.den, hints):
        total = total + residue(f, pole)
    return not total
