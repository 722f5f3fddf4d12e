"""Dense univariate polynomials over an exact coefficient field.

Coefficients are stored ascending by degree with trailing zeros stripped,
so the zero polynomial has an empty list. The coefficient field is a field
object (see fields.py) supplying zero/one/coerce; the elements themselves
carry the ring operators. Everything here is immutable and exact.
"""

from __future__ import annotations

from ..errors import IrreducibleDenominator

__all__ = [
    "Poly",
    "poly_gcd",
    "squarefree_decomposition",
    "poly_sqrt",
]


class Poly:
    __slots__ = ("field", "var", "coeffs")

    def __init__(self, field, coeffs, var="x", normalize=True):
        if normalize:
            coeffs = [field.coerce(c) for c in coeffs]
            while coeffs and not coeffs[-1]:
                coeffs.pop()
        self.field = field
        self.var = var
        self.coeffs = tuple(coeffs)

    # --- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, field, var="x"):
        return cls(field, (), var, normalize=False)

    @classmethod
    def one(cls, field, var="x"):
        return cls(field, [field.one()], var, normalize=False)

    @classmethod
    def const(cls, field, c, var="x"):
        return cls(field, [c], var)

    @classmethod
    def gen(cls, field, var="x"):
        """The polynomial `var` itself."""
        return cls(field, [field.zero(), field.one()], var, normalize=False)

    @classmethod
    def from_roots(cls, field, roots, var="x"):
        p = cls.const(field, field.one(), var)
        x = cls.gen(field, var)
        for r in roots:
            p = p * (x - cls.const(field, field.coerce(r), var))
        return p

    # --- structure ---------------------------------------------------------

    def degree(self):
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __bool__(self):
        return bool(self.coeffs)

    def is_const(self):
        return len(self.coeffs) <= 1

    def leading(self):
        if not self.coeffs:
            return self.field.zero()
        return self.coeffs[-1]

    def constant(self):
        if not self.coeffs:
            return self.field.zero()
        return self.coeffs[0]

    def coeff(self, k):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.field.zero()

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = self._coerce_operand(other)
            if other is NotImplemented:
                return NotImplemented
        return self.coeffs == other.coeffs

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        return hash((self.var, self.coeffs))

    # --- arithmetic --------------------------------------------------------

    def _coerce_operand(self, other):
        if isinstance(other, Poly):
            return other
        try:
            c = self.field.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return Poly(self.field, [c], self.var, normalize=False) if c else Poly.zero(self.field, self.var)

    def __add__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(self.field, out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.field, [-c for c in self.coeffs], self.var, normalize=False)

    def __sub__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly.zero(self.field, self.var)
        if len(a) == 1:
            c = a[0]
            return Poly(self.field, [c * bj for bj in b], self.var)
        if len(b) == 1:
            c = b[0]
            return Poly(self.field, [ai * c for ai in a], self.var)
        zero = self.field.zero()
        out = [zero] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] = out[i + j] + ai * bj
        return Poly(self.field, out, self.var)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(self.field, self.field.one(), self.var)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __divmod__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly.zero(self.field, self.var), self
        inv_lead = self.field.one() / other.leading()
        quot = [self.field.zero()] * (dq + 1)
        for k in range(dq, -1, -1):
            c = rem[k + other.degree()] * inv_lead
            quot[k] = c
            if c:
                for j, bj in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * bj
        return Poly(self.field, quot, self.var), Poly(self.field, rem, self.var)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __truediv__(self, other):
        """Exact division by a scalar (or a polynomial that divides exactly)."""
        if isinstance(other, Poly):
            q, r = divmod(self, other)
            if r:
                raise ValueError("inexact polynomial division")
            return q
        c = self.field.coerce(other)
        inv = self.field.one() / c
        return Poly(self.field, [a * inv for a in self.coeffs], self.var, normalize=False)

    # --- calculus & evaluation --------------------------------------------

    def deriv(self):
        """Derivative with respect to the polynomial's own variable."""
        if len(self.coeffs) <= 1:
            return Poly.zero(self.field, self.var)
        out = []
        for i in range(1, len(self.coeffs)):
            out.append(self.coeffs[i] * self.field.coerce(i))
        return Poly(self.field, out, self.var)

    def map_coeffs(self, fn, field=None):
        """Apply fn to every coefficient (e.g. a coefficient derivation)."""
        f = field if field is not None else self.field
        return Poly(f, [fn(c) for c in self.coeffs], self.var)

    def __call__(self, v):
        """Horner evaluation; v may live in any ring the coefficients embed in.

        For a constant polynomial the bare coefficient is returned; callers
        composing into a bigger ring coerce it there themselves.
        """
        if not self.coeffs:
            return self.field.zero()
        acc = None
        for c in reversed(self.coeffs):
            acc = c if acc is None else acc * v + c
        return acc

    def taylor_at(self, a, n):
        """First n coefficients of self(a + w) as a list (ascending in w).

        Computed by repeated synthetic division, which stays exact and cheap.
        """
        a = self.field.coerce(a)
        zero = self.field.zero()
        rem = list(self.coeffs)
        out = []
        for _ in range(n):
            if not rem:
                out.append(zero)
                continue
            if len(rem) == 1:
                out.append(rem[0])
                rem = []
                continue
            q = [zero] * (len(rem) - 1)
            carry = rem[-1]
            q[-1] = carry
            for i in range(len(rem) - 2, 0, -1):
                carry = rem[i] + carry * a
                q[i - 1] = carry
            out.append(rem[0] + carry * a)
            rem = q
        return out

    def monic(self):
        """(monic polynomial, leading coefficient)."""
        if not self.coeffs:
            return self, self.field.one()
        lc = self.leading()
        if lc == self.field.one():
            return self, lc
        return self / lc, lc

    def shift_mul_x(self, k):
        """Multiply by var**k (k >= 0)."""
        if not self.coeffs or k == 0:
            return self
        return Poly(self.field, [self.field.zero()] * k + list(self.coeffs), self.var, normalize=False)

    def reversed_coeffs(self):
        """Coefficients of x^deg * self(1/x)."""
        return Poly(self.field, list(reversed(self.coeffs)), self.var)

    # --- display -----------------------------------------------------------

    def to_str(self, fmt=str):
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            cs = fmt(c)
            needs_paren = ("+" in cs[1:]) or ("-" in cs[1:]) or ("/" in cs) or (" " in cs)
            if i == 0:
                parts.append(f"({cs})" if needs_paren and parts else cs)
            else:
                xs = self.var if i == 1 else f"{self.var}^{i}"
                if cs == "1":
                    parts.append(xs)
                elif cs == "-1":
                    parts.append(f"-{xs}")
                else:
                    parts.append(f"({cs})*{xs}" if needs_paren else f"{cs}*{xs}")
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self.to_str()})"


def poly_gcd(a, b):
    """Monic gcd by the Euclidean algorithm (coefficients form a field)."""
    if (a and a.degree() == 0) or (b and b.degree() == 0):
        return Poly.one(a.field, a.var)
    while b:
        a, b = b, a % b
    if not a:
        return a
    return a.monic()[0]


def squarefree_decomposition(p):
    """Yun's algorithm. Returns (lc, [(g_1,1), (g_2,2), ...]) with
    p = lc * prod g_i^i, the g_i monic, squarefree and pairwise coprime.
    Factors with g_i == 1 are omitted."""
    if not p:
        raise ValueError("squarefree decomposition of zero")
    p, lc = p.monic()
    if p.degree() == 0:
        return lc, []
    dp = p.deriv()
    a0 = poly_gcd(p, dp)
    if a0.degree() == 0:
        return lc, [(p, 1)]
    b = p / a0
    c = dp / a0
    d = c - b.deriv()
    out = []
    i = 1
    while b.degree() > 0:
        a = poly_gcd(b, d)
        if a.degree() > 0:
            out.append((a, i))
        b = b / a
        c = d / a
        d = c - b.deriv()
        i += 1
    return lc, out


def poly_sqrt(p):
    """Exact square root of a polynomial, or None.

    The leading coefficient must be a square in the coefficient field
    (checked through field.sqrt)."""
    if not p:
        return p
    deg = p.degree()
    if deg % 2:
        return None
    field = p.field
    lead = field.sqrt(p.leading())
    if lead is None:
        return None
    m = deg // 2
    b = [field.zero()] * (m + 1)
    b[m] = lead
    inv2lead = field.one() / (lead + lead)
    # match coefficients downward from degree 2m-1; at step k the only
    # unknown in sum_{i+j=k} b_i b_j is b_{k-m} (twice, against b_m)
    for k in range(2 * m - 1, m - 1, -1):
        acc = field.zero()
        for i in range(k - m + 1, m):
            acc = acc + b[i] * b[k - i]
        b[k - m] = (p.coeff(k) - acc) * inv2lead
    q = Poly(field, b, p.var)
    if q * q == p:
        return q
    return None
