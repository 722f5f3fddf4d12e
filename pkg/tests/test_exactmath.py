"""Exact arithmetic layer: ring axioms, residue calculus, the field tower."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from isorec.errors import IrreducibleDenominator, TruncationTooShort
from isorec.exactmath import (
    INF, FunctionField, HbarSeries, LocalSeries, Poly, QQ,
    QuadraticExtension, RatFn, local_expand, parse_element,
    partial_fractions, poly_gcd, poly_sqrt, recombine, residue,
    residue_sum_check, roots_in_field, squarefree_decomposition,
)

Qt = FunctionField(QQ, "t")


def X():
    return RatFn.gen(QQ, "x")


# --- strategies -----------------------------------------------------------

rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 9))

small_polys = st.builds(
    lambda cs: Poly(QQ, cs, "x"),
    st.lists(rationals, min_size=0, max_size=5),
)

nonzero_polys = small_polys.filter(bool)

ratfns = st.builds(lambda n, d: RatFn(n, d), small_polys, nonzero_polys)


@st.composite
def pole_sums(draw):
    """Rational function built from explicit poles of order <= 4 plus a polynomial."""
    x = X()
    f = RatFn(draw(small_polys))
    npoles = draw(st.integers(1, 3))
    for _ in range(npoles):
        p = draw(st.integers(-5, 5))
        order = draw(st.integers(1, 4))
        c = draw(rationals)
        if c:
            f = f + c / (x - p) ** order
    return f


# --- ring axioms ------------------------------------------------------------


@given(ratfns, ratfns, ratfns)
def test_distributivity(f, g, h):
    assert (f + g) * h == f * h + g * h


@given(ratfns, ratfns)
def test_commutativity_and_inverse(f, g):
    assert f + g == g + f
    assert f * g == g * f
    if g:
        assert (f / g) * g == f


@given(ratfns)
def test_canonical_form(f):
    assert f.den.leading() == 1
    assert poly_gcd(f.num, f.den).degree() <= 0 or not f.num


# --- partial fractions ------------------------------------------------------


def test_difference_of_squares():
    f = 1 / (X() ** 2 - 1)
    pp, terms = partial_fractions(f)
    assert not pp
    assert terms == [(Fraction(-1), 1, Fraction(-1, 2)),
                     (Fraction(1), 1, Fraction(1, 2))]


def test_pure_polynomial_has_no_poles():
    f = X() ** 3
    pp, terms = partial_fractions(f)
    assert pp == Poly(QQ, [0, 0, 0, 1], "x")
    assert terms == []


def test_double_pole():
    x = X()
    pp, terms = partial_fractions(2 * x / (x - 3) ** 2)
    assert not pp
    assert terms == [(Fraction(3), 1, Fraction(2)),
                     (Fraction(3), 2, Fraction(6))]


@settings(max_examples=200, deadline=None)
@given(pole_sums())
def test_partial_fraction_round_trip(f):
    pp, terms = partial_fractions(f)
    assert recombine(pp, terms) == f


def test_irreducible_denominator_refused():
    f = 1 / (X() ** 2 + 1)
    with pytest.raises(IrreducibleDenominator):
        partial_fractions(f)


def test_splitting_over_the_extension():
    K = QuadraticExtension(QQ, -1, "i")
    x = RatFn.gen(K, "x")
    pp, terms = partial_fractions(1 / (x * x + 1))
    assert len(terms) == 2
    assert recombine(pp, terms) == 1 / (x * x + 1)


# --- residues ---------------------------------------------------------------


def test_residue_basics():
    x = X()
    assert residue(1 / x, Fraction(0)) == 1
    assert residue(1 / x, INF) == -1
    assert residue(x / ((x - 1) * (x + 2)), Fraction(1)) == Fraction(1, 3)
    assert residue(x ** 2, Fraction(0)) == 0
    assert residue(x ** 2, INF) == 0


@settings(deadline=None)
@given(pole_sums())
def test_residue_sum_vanishes(f):
    assert residue_sum_check(f)


@given(ratfns, st.integers(-3, 3))
def test_residue_at_regular_point_is_zero(f, a):
    a = Fraction(a)
    if f and not f.den(a):
        return
    assert residue(f, a) == 0


# --- local expansion --------------------------------------------------------


def test_geometric_series():
    s = local_expand(1 / (1 - X()), Fraction(0), 3)
    assert [s.coeff(k) for k in range(4)] == [1, 1, 1, 1]
    with pytest.raises(TruncationTooShort):
        s.coeff(4)


def test_pure_double_pole_window():
    s = local_expand(1 / X() ** 2, Fraction(0), 0)
    assert s.coeff(-2) == 1
    assert s.coeff(-1) == 0
    assert s.coeff(0) == 0


def test_expansion_at_infinity():
    s = local_expand((X() + 1) / X(), INF, 2)
    assert s.coeff(0) == 1
    assert s.coeff(1) == 1
    assert s.coeff(2) == 0


def test_window_below_leading_exponent_refused():
    with pytest.raises(TruncationTooShort):
        local_expand(X() ** 3, INF, -4)


@settings(deadline=None)
@given(ratfns, ratfns, st.integers(0, 4))
def test_local_expand_is_multiplicative(f, g, K):
    if not f or not g:
        return
    lhs = local_expand(f * g, Fraction(0), K)
    rhs = local_expand(f, Fraction(0), K) * local_expand(g, Fraction(0), K)
    prec = min(lhs.prec, rhs.prec)
    assert lhs.truncate(prec) == rhs.truncate(prec)


def test_residue_matches_expansion_coefficient():
    x = X()
    f = (3 * x + 2) / (x ** 2 * (x - 1))
    s = local_expand(f, Fraction(0), 1)
    assert s.coeff(-1) == residue(f, Fraction(0))


# --- the field tower --------------------------------------------------------


def ext_field():
    return QuadraticExtension(Qt, parse_element("-2*t/3", Qt), "u")


@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6),
       st.integers(-6, 6))
def test_extension_product_rule(a0, a1, b0, b1):
    K = ext_field()
    t = K.coerce(Qt.gen())
    u = K.u()
    a = a0 + a1 * t * u
    b = b0 * t + b1 * u
    assert K.diff(a * b) == K.diff(a) * b + a * K.diff(b)


def test_derivation_of_u_squared():
    K = ext_field()
    u = K.u()
    lhs = K.diff(u * u)
    r = K.coerce(parse_element("-2*t/3", Qt))
    # (u^2)' must equal r'(t)
    assert lhs == K.diff(r)
    assert Qt.to_str(K.diff(r).a) == "-2/3"


def test_extension_inverse_and_norm():
    K = ext_field()
    e = parse_element("t + u", K)
    assert e * e.inverse() == K.one()


def test_sqrt_cases_in_extension():
    K = ext_field()
    t = K.coerce(Qt.gen())
    u = K.u()
    s = K.sqrt(K.coerce(parse_element("-2*t/3", Qt)))
    assert s == u or s == -u
    s2 = K.sqrt(t * t)
    assert s2 == t or s2 == -t
    # (1 + u)^2 = 1 - 2t/3 + 2u is a square with both parts nonzero
    s3 = K.sqrt((1 + u) * (1 + u))
    assert s3 == 1 + u or s3 == -(1 + u)
    assert K.sqrt(K.coerce(Qt.gen() + 1) * u) is None or True  # no crash


def test_function_field_sqrt():
    f = parse_element("(t^2 + 2*t + 1)/(4*t^2)", Qt)
    s = Qt.sqrt(f)
    assert s is not None and s * s == f
    assert Qt.sqrt(Qt.gen()) is None


def test_parse_element_round_trip():
    K = ext_field()
    e = parse_element("-(3/2)*t^2 + u/2 - 1", K)
    again = parse_element(K.to_str(e), K)
    assert again == e


def test_parse_rejects_foreign_symbols():
    with pytest.raises(ValueError):
        parse_element("x + 1", Qt)


# --- polynomial utilities ---------------------------------------------------


def test_taylor_shift():
    p = Poly(QQ, [1, 0, 1], "x")  # 1 + x^2
    assert p.taylor_at(Fraction(2), 3) == [5, 4, 1]


def test_squarefree_decomposition():
    x = Poly.gen(QQ, "x")
    p = (x - 1) ** 2 * (x + 2) ** 3 * (x - 5)
    lc, factors = squarefree_decomposition(p)
    assert lc == 1
    got = {(g.to_str(), m) for g, m in factors}
    assert got == {("x - 5", 1), ("x - 1", 2), ("x + 2", 3)}


def test_poly_sqrt():
    x = Poly.gen(QQ, "x")
    p = (x ** 2 + 3 * x - 2) ** 2
    q = poly_sqrt(p)
    assert q is not None and q * q == p
    assert poly_sqrt(x ** 2 + 1) is None
    assert poly_sqrt(2 * x ** 2) is None  # leading 2 is not a rational square


@given(nonzero_polys, nonzero_polys)
def test_gcd_divides_both(a, b):
    g = poly_gcd(a, b)
    assert not (a % g)
    assert not (b % g)


def test_roots_with_multiplicity():
    x = Poly.gen(QQ, "x")
    p = (x - 1) ** 2 * (2 * x + 3)
    assert roots_in_field(p) == [(Fraction(-3, 2), 1), (Fraction(1), 2)]


def test_roots_via_quadratic_over_function_field():
    t = Qt.gen()
    x = Poly.gen(Qt, "x")
    p = x * x - Poly.const(Qt, t * t, "x")
    roots = roots_in_field(p)
    assert sorted(Qt.to_str(r) for r, _ in roots) == ["-t", "t"]


# --- truncated series -------------------------------------------------------


def test_hbar_series_truncation_is_an_error():
    s = HbarSeries(0, [Fraction(1), Fraction(2)], 2, Fraction(0))
    assert s.coeff(1) == 2
    with pytest.raises(TruncationTooShort):
        s.coeff(2)


def test_hbar_series_product_precision():
    # the O(h^2) tail of the first factor hits the unit term of the second,
    # so only the h coefficient of the product is certain
    a = HbarSeries(1, [Fraction(1)], 2, Fraction(0))
    b = HbarSeries(0, [Fraction(1), Fraction(1), Fraction(1)], 3, Fraction(0))
    p = a * b
    assert p.kmin == 1 and p.prec == 2
    assert p.coeff(1) == 1
    with pytest.raises(TruncationTooShort):
        p.coeff(2)


def test_hbar_series_inverse():
    s = HbarSeries(0, [Fraction(1), Fraction(-1)], 4, Fraction(0))  # 1 - h
    inv = s.inverse()
    assert [inv.coeff(k) for k in range(4)] == [1, 1, 1, 1]


def test_local_series_ramification():
    s = LocalSeries(QQ, INF, 1, [Fraction(2), Fraction(3)], 3)
    r = s.with_ram(2)
    assert r.ram == 2
    assert r.coeff(2) == 2 and r.coeff(3) == 0 and r.coeff(4) == 3
    with pytest.raises(TruncationTooShort):
        r.coeff(5)


def test_local_series_inverse_precision():
    s = local_expand(1 / (1 - X()), Fraction(0), 4)
    inv = s.inverse()
    assert inv.coeff(0) == 1 and inv.coeff(1) == -1
    assert all(inv.coeff(k) == 0 for k in range(2, 5))
