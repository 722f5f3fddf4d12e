"""Formal flows of the deformed Hamilton equations.

Given H(p, q, t) polynomial in a Darboux pair over a differential field,
solve

    h q'(t) = dH/dp,      h p'(t) = -dH/dq

as truncated series q = sum q_k h^k, p = sum p_k h^k.  The leading order is
a critical point of H in (p, q); each next order is a 2x2 linear solve
against the Hessian there.  Coefficients stay in Q(t) or a single quadratic
extension Q(t)[u]/(u^2 - r(t)) — the derivation knows u' = r' u / (2r).
"""

from __future__ import annotations

from .errors import SingularHessian, UnsolvableInTower
from .exactmath import (HbarSeries, QuadraticExtension, partial_derivation,
                        split_linear_factors, squarefree_decomposition,
                        substitute)
from .exactmath.fields import FunctionField, _generators


class LeadingOrder:
    """A critical point of H, with the field it lives in.

    `modulus` is the defining r(t) when a quadratic extension u^2 = r was
    needed (None otherwise); `root` records which square root the caller
    picked.
    """

    __slots__ = ("field", "p0", "q0", "modulus", "uname", "root")

    def __init__(self, field, p0, q0, modulus=None, uname="u", root="plus"):
        self.field = field
        self.p0 = field.coerce(p0)
        self.q0 = field.coerce(q0)
        self.modulus = modulus
        self.uname = uname
        self.root = root

    def __repr__(self):
        return ("LeadingOrder(p0=%s, q0=%s, modulus=%s)"
                % (self.p0, self.q0, self.modulus))


class FlowSeries:
    """Truncated solution of the deformed Hamilton equations.

    q and p are series with coefficients in `field`; `order` is the last
    exponent whose Hamilton residual has been made to vanish.
    """

    __slots__ = ("field", "q", "p", "qname", "pname", "order", "lead")

    def __init__(self, field, q, p, qname, pname, order, lead):
        self.field = field
        self.q = q
        self.p = p
        self.qname = qname
        self.pname = pname
        self.order = order
        self.lead = lead

    def to_json(self):
        fmt = self.field.to_str
        blob = {
            "order": self.order,
            "q": [fmt(self.q.coeff(k)) for k in range(self.order + 1)],
            "p": [fmt(self.p.coeff(k)) for k in range(self.order + 1)],
        }
        if self.lead is not None and self.lead.modulus is not None:
            base = self.field.base
            blob["extension"] = {
                "name": self.lead.uname,
                "square": base.to_str(self.lead.modulus),
                "root": self.lead.root,
            }
        else:
            blob["extension"] = None
        return blob

    def __repr__(self):
        return "FlowSeries(order=%s over %r)" % (self.order, self.field)


def _split_tower(H):
    """H over ...(t)(q)(p): return (E, qname, pname, F) with E the time
    field and F the full tower containing H.

    A tower element is a RatFn in the outermost variable whose .field is
    the coefficient ring one level down, hence the reconstruction here.
    """
    Fq = H.field
    if not isinstance(Fq, FunctionField):
        raise TypeError("H must live in a (q, p) tower over the time field")
    return Fq.base, Fq.var, H.var, FunctionField(Fq, H.var)


def _factor_roots(poly, root, uname):
    """Roots of a univariate Poly over E, escalating by at most one
    quadratic extension.  Returns (value, field, modulus)."""
    E = poly.field
    if poly.degree() < 1:
        raise UnsolvableInTower(
            "critical equation %s has no root" % (poly,))
    roots, rest = split_linear_factors(poly)
    if roots:
        return roots[0][0], E, None
    _, factors = squarefree_decomposition(rest)
    quad = next((g for g, _m in factors if g.degree() == 2), None)
    if quad is None:
        raise UnsolvableInTower(
            "no critical point within one quadratic extension of %r" % (E,))
    b = quad.coeff(1)
    c = quad.coeff(0)
    two = E.coerce(2)
    if not b:
        r = -c  # monic: q^2 + c = 0  ->  q^2 = -c
        ext = QuadraticExtension(E, r, uname)
        u = ext.u()
        val = u if root == "plus" else -u
        return val, ext, r
    disc = b * b - E.coerce(4) * c
    ext = QuadraticExtension(E, disc, uname)
    u = ext.u()
    pick = u if root == "plus" else -u
    val = (pick - ext.coerce(b)) / ext.coerce(two)
    return val, ext, disc


def leading_order(H, root="plus", uname="u"):
    """Critical point of H in the Darboux pair, over Q(t) or one
    quadratic extension.

    Both partial derivatives vanish exactly at the returned point.  When
    the critical equation is an irreducible quadratic, `root` selects the
    branch ("plus" or "minus"); deeper extensions are refused.
    """
    E, qname, pname, F = _split_tower(H)
    Hp = H.deriv()
    Hq = partial_derivation(F, qname)(H)
    if not Hp.is_poly() or not Hq.is_poly():
        raise TypeError("H must be polynomial in the Darboux pair")
    np_ = Hp.as_poly()

    if np_.degree() == 1:
        # p enters dH/dp linearly: eliminate it, then solve in q alone
        c1 = np_.coeff(1)
        psol = -np_.coeff(0) / c1
        g = Hq(psol)
        if not g:
            raise UnsolvableInTower(
                "critical locus is a curve, not a point")
        q0, field, modulus = _factor_roots(g.num, root, uname)
        try:
            p0 = _eval_ratfn(psol, q0, field)
        except ZeroDivisionError:
            raise UnsolvableInTower(
                "eliminated momentum has a pole at the critical point")
        return LeadingOrder(field, p0, q0, modulus, uname, root)

    if np_.degree() == 0:
        cq = np_.coeff(0)
        if not cq:
            raise UnsolvableInTower("dH/dp vanishes identically")
        if cq.is_poly() and cq.as_poly().degree() < 1:
            raise UnsolvableInTower(
                "dH/dp is a nonzero constant: no critical point")
        # dH/dp depends on q only: root it, then solve dH/dq for p
        q0, field, modulus = _factor_roots(cq.num, root, uname)
        hq_at = Hq.map_coeffs(lambda e: _eval_ratfn(e, q0, field), field)
        if not hq_at:
            raise UnsolvableInTower("critical locus is a curve, not a point")
        p0, field2, modulus2 = _factor_roots(hq_at.num, root, uname)
        if modulus is not None and modulus2 is not None:
            raise UnsolvableInTower(
                "critical point needs two independent extensions")
        out_field = field2 if modulus2 is not None else field
        return LeadingOrder(out_field, p0, q0, modulus or modulus2, uname,
                            root)

    raise UnsolvableInTower(
        "dH/dp has degree %s in p; supply the critical point explicitly"
        % np_.degree())


def _eval_ratfn(f, value, field):
    """Evaluate a RatFn at a point of a (possibly larger) field."""
    num = _eval_poly(f.num, value, field)
    den = _eval_poly(f.den, value, field)
    return num / den


def _eval_poly(p, value, field):
    acc = field.zero()
    for c in reversed(p.coeffs):
        acc = acc * value + field.coerce(c)
    return acc


def _values_at(E, prec):
    zE = E.zero()

    def const(v):
        return HbarSeries.constant(v, prec, zE)

    vals = {name: const(g) for name, g in _generators(E).items()}
    return vals, const(E.one()), zE


def extend_flow(H, lead, order=4):
    """Solve the deformed Hamilton equations through the given order.

    Each step inverts the Hessian of H at the leading point; a singular
    Hessian means the genericity assumption behind the recursion fails.
    """
    E2 = lead.field
    _, qname, pname, F = _split_tower(H)
    scalars = dict(_generators(E2))
    scalars[qname] = lead.q0
    scalars[pname] = lead.p0

    def at_point(expr):
        return substitute(expr, scalars, E2.one())

    Hp = H.deriv()
    Hq = partial_derivation(F, qname)(H)
    hpp = at_point(partial_derivation(F, pname)(Hp))
    hpq = at_point(partial_derivation(F, qname)(Hp))
    hqq = at_point(partial_derivation(F, qname)(Hq))
    det = hpp * hqq - hpq * hpq
    if not det:
        raise SingularHessian(
            "Hessian of H is singular at the leading point %r" % (lead,))
    inv_det = E2.one() / det

    qc = [lead.q0]
    pc = [lead.p0]
    zE = E2.zero()
    for k in range(1, order + 1):
        prec = k + 1
        vals, one_h, _ = _values_at(E2, prec)
        vals[qname] = HbarSeries(0, list(qc), prec, zE)
        vals[pname] = HbarSeries(0, list(pc), prec, zE)
        rp = substitute(Hp, vals, one_h).coeff(k)
        rq = substitute(Hq, vals, one_h).coeff(k)
        b1 = E2.diff(qc[k - 1]) - rp
        b2 = -E2.diff(pc[k - 1]) - rq
        # [[hpp, hpq], [hpq, hqq]] (p_k, q_k)^T = (b1, b2)^T
        pk = (hqq * b1 - hpq * b2) * inv_det
        qk = (hpp * b2 - hpq * b1) * inv_det
        pc.append(pk)
        qc.append(qk)
    prec = order + 1
    q_s = HbarSeries(0, qc, prec, zE)
    p_s = HbarSeries(0, pc, prec, zE)
    return FlowSeries(E2, q_s, p_s, qname, pname, order, lead)


def hamilton_residuals(H, flow):
    """(h q' - dH/dp, h p' + dH/dq) composed with the flow.

    Both series vanish identically through the flow's order.
    """
    E = flow.field
    prec = flow.order + 1
    vals, one_h, _ = _values_at(E, prec)
    vals[flow.qname] = flow.q
    vals[flow.pname] = flow.p
    Hp = H.deriv()
    Hq = partial_derivation(_split_tower(H)[3], flow.qname)(H)
    dq = flow.q.map_coeffs(E.diff).shift(1)
    dp = flow.p.map_coeffs(E.diff).shift(1)
    r1 = dq - substitute(Hp, vals, one_h)
    r2 = dp + substitute(Hq, vals, one_h)
    return r1, r2


def energy_drift(H, flow):
    """d/dt of H along the flow minus the explicit time derivative.

    The chain rule plus Hamilton's equations make this vanish; with a flow
    of order K the difference is certified through h^(K-1) (the order-K
    coefficient would need the next flow correction).
    """
    E = flow.field
    prec = flow.order + 1
    vals, one_h, _ = _values_at(E, prec)
    vals[flow.qname] = flow.q
    vals[flow.pname] = flow.p
    base, _, _, F = _split_tower(H)
    along = substitute(H, vals, one_h)
    total = along.map_coeffs(E.diff)
    if isinstance(base, FunctionField):
        Ht = partial_derivation(F, base.var)(H)
        expl = substitute(Ht, vals, one_h)
    else:
        expl = HbarSeries(prec, [], prec, E.zero())
    drift = total - expl
    return drift.truncate(flow.order)
