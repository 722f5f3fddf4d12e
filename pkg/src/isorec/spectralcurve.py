"""The classical (h -> 0) spectral curve and its rational uniformization.

From the leading Lax matrix L0 the curve is y^2 = Q(x) := -det L0.  Even-order
vanishing of Q is split off as a square prefactor; only the odd part creates
branchpoints, and genus 0 limits it to the reduced forms

    y^2 = c (x - a)(x - b)        two finite branchpoints, or
    y^2 = c (x - a)               one finite branchpoint plus x = infinity.

Both are uniformized by degree-2 rational maps x(z) with involution sigma
exchanging the sheets.  Sheet 1 is the one where y ~ +sqrt(Q) as z -> inf.
"""

from __future__ import annotations

from .errors import (ConfluentBranchpoints, HigherGenus, NilpotentLeading,
                     NoBranchpoints, NotHolomorphicAtBranch, NotProportional,
                     UnsolvableInTower)
from .exactmath import (Poly, QuadraticExtension, RatFn, squarefree_decomposition,
                        split_linear_factors, substitute)
from .exactmath.fields import FunctionField, _generators
from .laxsystem import assemble

TWO_BRANCH = "two"
ONE_BRANCH = "one"


class ClassicalCurve:
    """y^2 = Q(x) with Q = -det L0, split as Q = c * square^2 * reduced.

    `reduced` is monic squarefree (the odd part of Q), `square` a rational
    function, `c` a scalar; alpha is the proportionality A0 = alpha * L0
    when an auxiliary matrix was supplied.
    """

    __slots__ = ("field", "var", "Q", "square", "reduced", "c", "alpha",
                 "L0", "A0")

    def __init__(self, field, var, Q, square, reduced, c, alpha, L0, A0):
        self.field = field
        self.var = var
        self.Q = Q
        self.square = square
        self.reduced = reduced
        self.c = c
        self.alpha = alpha
        self.L0 = L0
        self.A0 = A0

    def __repr__(self):
        return "ClassicalCurve(y^2 = %s)" % (self.Q,)


def classical_curve(L0, A0=None):
    """Curve of a leading Lax matrix (entries: RatFn in x over a scalar
    field, trace-free).

    When A0 is given, checks [L0, A0] = 0 and extracts alpha with
    A0 = alpha L0; commuting with a non-nilpotent L0 forces
    proportionality, so a failure means inadmissible input.
    """
    if not L0.is_trace_free():
        raise ValueError("leading Lax matrix must be trace-free")
    some = L0.b or L0.a or L0.c
    if not some:
        raise NilpotentLeading("leading Lax matrix vanishes identically")
    var = some.var
    E = some.field
    Q = -L0.det()
    if not Q:
        raise NilpotentLeading(
            "det L0 = 0 with zero trace: nilpotent leading matrix")
    alpha = None
    if A0 is not None:
        comm = L0.commutator(A0)
        if comm.a or comm.b or comm.c or comm.d:
            raise NotProportional("[L0, A0] != 0")
        for le, ae in zip(L0.entries(), A0.entries()):
            if le:
                alpha = ae / le
                break
        scaled = L0.map(lambda e: e * alpha)
        if any(x != y for x, y in zip(scaled.entries(), A0.entries())):
            raise NotProportional(
                "A0 is not a rational multiple of L0")
    sq_n, red_n, lc_n = _odd_even_split(Q.num)
    sq_d, red_d, lc_d = _odd_even_split(Q.den)
    if red_d.degree() > 0:
        raise HigherGenus(
            "odd-order pole of Q at a zero of %s: outside the supported "
            "linear/quadratic reduced forms" % red_d.to_str())
    square = RatFn(sq_n, sq_d)
    c = lc_n / lc_d
    return ClassicalCurve(E, var, Q, square, red_n, c, alpha, L0, A0)


def _odd_even_split(p):
    """p = lc * (sq^2) * red with red monic squarefree (the odd part)."""
    field = p.field
    lc, factors = squarefree_decomposition(p)
    sq = Poly.one(field, p.var)
    red = Poly.one(field, p.var)
    for g, mult in factors:
        if mult // 2:
            sq = sq * g ** (mult // 2)
        if mult % 2:
            red = red * g
    return sq, red, lc


class Uniformization:
    """Rational parametrization of the reduced curve.

    kind TWO_BRANCH: x(z) = (a+b)/2 + ((b-a)/4)(z + 1/z), sigma(z) = 1/z,
    branch z-points +1, -1.  kind ONE_BRANCH: x(z) = a + z^2,
    sigma(z) = -z, branch z-point 0 (the second branchpoint is
    x = infinity).  y(z) is rational; y(sigma(z)) = -y(z).
    """

    __slots__ = ("kind", "field", "zvar", "a", "b", "x", "y",
                 "branch_zpoints", "modulus", "uname")

    def __init__(self, kind, field, zvar, a, b, x, y, modulus=None,
                 uname=None):
        self.kind = kind
        self.field = field
        self.zvar = zvar
        self.a = a
        self.b = b
        self.x = x
        self.y = y
        self.modulus = modulus
        self.uname = uname
        if kind == TWO_BRANCH:
            if a == b:
                raise ConfluentBranchpoints(
                    "branchpoints coincide at %s" % field.to_str(a))
            self.branch_zpoints = (field.one(), -field.one())
        else:
            self.branch_zpoints = (field.zero(),)
        if self.apply_sigma(x) != x:
            raise ValueError("x is not involution-invariant")
        if self.apply_sigma(y) != -y:
            raise ValueError("y is not involution-odd")
        num = x.deriv().num
        for s in self.branch_zpoints:
            num, rem = _strip_once(num, s)
            if rem:
                raise ValueError("dx does not vanish at branch z-point %s"
                                 % field.to_str(s))
        if num.degree() != 0:
            raise ValueError("dx vanishes away from the branch z-points")

    def sigma_point(self, z0):
        """Image of a scalar point under the sheet involution."""
        if self.kind == TWO_BRANCH:
            return self.field.one() / z0
        return -z0

    def flipped(self):
        """The same covering with the two sheets relabelled (y -> -y)."""
        return Uniformization(self.kind, self.field, self.zvar, self.a,
                              self.b, self.x, -self.y, modulus=self.modulus,
                              uname=self.uname)

    def apply_sigma(self, f):
        """Pull a rational function of z back through sigma."""
        zf = FunctionField(self.field, self.zvar)
        z = zf.gen()
        w = zf.one() / z if self.kind == TWO_BRANCH else -z
        return f(w)

    def to_json(self):
        fmt = self.field.to_str
        blob = {"kind": self.kind, "a": fmt(self.a),
                "x": self.x.to_str(fmt), "y": self.y.to_str(fmt)}
        blob["b"] = fmt(self.b) if self.b is not None else None
        if self.modulus is not None:
            blob["extension"] = {"name": self.uname,
                                 "square": self.field.base.to_str(
                                     self.modulus)}
        else:
            blob["extension"] = None
        return blob

    def __repr__(self):
        return "Uniformization(%s, x=%s)" % (self.kind, self.x)


def _strip_once(p, r):
    """Divide one factor (z - r) out of p: (quotient, remainder-scalar)."""
    field = p.field
    out = []
    acc = field.zero()
    for c in reversed(p.coeffs):
        acc = acc * r + c
        out.append(acc)
    rem = out.pop()
    out.reverse()
    return Poly(field, out, p.var), rem


def _two_roots(red, E, uname):
    """Both roots of a monic squarefree quadratic, extending at most once."""
    roots, rest = split_linear_factors(red)
    if len(roots) == 2:
        vals = [r for r, _ in roots]
        return vals[0], vals[1], E, None
    beta = red.coeff(1)
    gamma = red.coeff(0)
    if not beta:
        r = -gamma
        ext = QuadraticExtension(E, r, uname)
        u = ext.u()
        return -u, u, ext, r
    disc = beta * beta - E.coerce(4) * gamma
    ext = QuadraticExtension(E, disc, uname)
    u = ext.u()
    half = ext.one() / ext.coerce(2)
    bb = ext.coerce(beta)
    return (-bb - u) * half, (-bb + u) * half, ext, disc


def uniformize(curve, zvar="z", uname="u"):
    """Exact rational parametrization of the reduced curve.

    This is the one place the scalar field may grow: quadratic branchpoints
    and a non-square leading constant each cost one extension, and only one
    in total is allowed.
    """
    E = curve.field
    red = curve.reduced
    deg = red.degree()
    if deg == 0:
        raise NoBranchpoints(
            "Q has no odd-order vanishing; y is already rational")
    if deg > 2:
        raise HigherGenus(
            "%s odd-order branchpoints (plus infinity parity); genus > 0"
            % deg)
    modulus = None
    if deg == 2:
        a, b, E2, modulus = _two_roots(red, E, uname)
    else:
        a = -red.coeff(0)
        b = None
        E2 = E
    c = E2.coerce(curve.c) if modulus is not None else curve.c
    yc = E2.sqrt(c)
    if yc is None:
        if modulus is not None:
            raise UnsolvableInTower(
                "leading coefficient %s is not a square over the extended "
                "field" % E.to_str(curve.c))
        E2 = QuadraticExtension(E, c, uname)
        modulus = c
        yc = E2.u()
        if b is not None:
            a, b = E2.coerce(a), E2.coerce(b)
        else:
            a = E2.coerce(a)

    zf = FunctionField(E2, zvar)
    z = zf.gen()
    one = zf.one()
    if deg == 2:
        half = E2.one() / E2.coerce(2)
        quarter = half * half
        mid = (a + b) * half
        rad = (b - a) * quarter
        x = mid * one + rad * (z + one / z)
        ysqrt = rad * (z - one / z)
    else:
        x = a * one + z * z
        ysqrt = z
    sq = curve.square
    if modulus is not None:
        sq = sq.map_coeffs(E2.coerce, E2)
    y = sq(x) * yc * ysqrt
    kind = TWO_BRANCH if deg == 2 else ONE_BRANCH
    return Uniformization(kind, E2, zvar, a, b, x, y, modulus,
                          uname if modulus is not None else None)


def curve_from_system(iso, lead, qname="q", pname="p", extra=None):
    """classical_curve of an isomonodromic system at its leading flow."""
    L0, A0 = leading_matrices(iso, lead, qname, pname, extra)
    return classical_curve(L0, A0)


def leading_matrices(iso, lead, qname="q", pname="p", extra=None):
    """Substitute the leading Darboux values into (L, A).

    `lead` is anything with .field, .q0, .p0 (a hamflow LeadingOrder).
    Returns matrices of RatFn in x over lead.field.
    """
    E2 = lead.field
    scal = dict(_generators(E2))
    scal[qname] = lead.q0
    scal[pname] = lead.p0
    if extra:
        for name, v in extra.items():
            scal[name] = E2.coerce(v)
    one = E2.one()

    def down(m):
        return m.map(lambda e: e.map_coeffs(
            lambda cf: substitute(cf, scal, one), E2))

    return down(assemble(iso.lax)), down(iso.aux)


def pullback(f, U):
    """f(x(z)): substitute the parametrization into a function of x."""
    if f.field != U.field:
        f = f.map_coeffs(U.field.coerce, U.field)
    return f(U.x)


def omega01(curve, U):
    """The one-form y dx, as the coefficient of dz.

    Must be holomorphic at the branch z-points (the admissibility condition
    on spectral curves); a pole there is a hard error.
    """
    w = U.y * U.x.deriv()
    for s in U.branch_zpoints:
        if not w.den(s):
            raise NotHolomorphicAtBranch(
                "y dx has a pole at branch z-point %s" % U.field.to_str(s))
    return w


def bergman(E, z1="z1", z2="z2"):
    """The genus-0 Bergman kernel dz1 dz2 / (z1 - z2)^2.

    Returned as the scalar coefficient: a rational function of z2 over
    E(z1).  Symmetric, double pole on the diagonal, no residue.
    """
    F1 = FunctionField(E, z1)
    F2 = FunctionField(F1, z2)
    w1 = F2.coerce(F1.gen())
    diff = F2.gen() - w1
    return F2.one() / (diff * diff)


class CurveFn:
    """f(x) + g(x) y as a function on the double cover, y^2 = Q(x).

    Closed under the field operations; conj() swaps the sheets.  dx() and
    dt() differentiate using y' = Q'/(2Q) y in the respective variable.
    """

    __slots__ = ("curve", "f", "g")

    def __init__(self, curve, f, g=None):
        zero = RatFn.zero(curve.field, curve.var)
        self.curve = curve
        self.f = zero + f if not isinstance(f, RatFn) else f
        if g is None:
            g = zero
        self.g = zero + g if not isinstance(g, RatFn) else g

    @classmethod
    def sheet_root(cls, curve):
        """The function y itself."""
        one = RatFn.one(curve.field, curve.var)
        return cls(curve, one - one, one)

    def _coerce(self, other):
        if isinstance(other, CurveFn):
            if other.curve is self.curve or other.curve.Q == self.curve.Q:
                return other
            return NotImplemented
        try:
            return CurveFn(self.curve, self.f + other - self.f)
        except TypeError:
            return NotImplemented

    def __bool__(self):
        return bool(self.f) or bool(self.g)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.f == o.f and self.g == o.g

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return CurveFn(self.curve, self.f + o.f, self.g + o.g)

    __radd__ = __add__

    def __neg__(self):
        return CurveFn(self.curve, -self.f, -self.g)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return CurveFn(self.curve, self.f - o.f, self.g - o.g)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        Q = self.curve.Q
        return CurveFn(self.curve,
                       self.f * o.f + self.g * o.g * Q,
                       self.f * o.g + self.g * o.f)

    __rmul__ = __mul__

    def conj(self):
        return CurveFn(self.curve, self.f, -self.g)

    def norm(self):
        """(f + g y)(f - g y) = f^2 - g^2 Q, a function of x alone."""
        return self.f * self.f - self.g * self.g * self.curve.Q

    def inverse(self):
        n = self.norm()
        if not n:
            raise ZeroDivisionError(
                "f^2 = g^2 Q: the function vanishes on one sheet")
        ni = n.inverse()
        return CurveFn(self.curve, self.f * ni, -self.g * ni)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inverse()

    def dx(self):
        Q = self.curve.Q
        gy = self.g.deriv() + self.g * Q.deriv() / (Q + Q)
        return CurveFn(self.curve, self.f.deriv(), gy)

    def dt(self):
        """Partial derivative in the scalar field's time, at fixed x."""
        E = self.curve.field
        Q = self.curve.Q
        ft = self.f.tderiv(E.diff)
        gt = self.g.tderiv(E.diff) + self.g * Q.tderiv(E.diff) / (Q + Q)
        return CurveFn(self.curve, ft, gt)

    def to_z(self, U):
        return pullback(self.f, U) + pullback(self.g, U) * U.y

    def to_str(self):
        fmt = self.curve.field.to_str
        return "(%s) + (%s)*y" % (self.f.to_str(fmt), self.g.to_str(fmt))

    def __repr__(self):
        return "CurveFn(%s)" % self.to_str()
