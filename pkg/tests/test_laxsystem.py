"""Lax-matrix layer: assembly, invariants, flows, Darboux charts."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from isorec.errors import (DegenerateOrbit, IndexOutOfRange, NonGenericOrbit,
                           PoleCollision)
from isorec.exactmath import (FunctionField, HbarSeries, Poly, QQ, RatFn,
                              parse_element)
from isorec.laxsystem import (Mat2, PoleData, SIGMA3, SIGMA_PLUS, Sl2Lax,
                              assemble, auxiliary_matrix, classify_casimirs,
                              darboux, from_quadratic, hamiltonians,
                              orbit_representative)


def tower(*names):
    F = QQ
    for n in names:
        F = FunctionField(F, n)
    return F


def mat(field, rows):
    """2x2 matrix of field elements parsed from strings."""
    (a, b), (c, d) = rows
    return Mat2(*(parse_element(s, field) for s in (a, b, c, d)))


def painleve1(field=None):
    """The quadratic Lax matrix [[p, x^2+qx+q^2+2t],[x-q, -p]] in
    coefficient form."""
    F = field or tower("t", "q", "p")
    coeffs = {
        (0, 2): mat(F, (("0", "1"), ("0", "0"))),
        (0, 1): mat(F, (("0", "q"), ("1", "0"))),
        (0, 0): mat(F, (("p", "q^2 + 2*t"), ("-q", "-p"))),
    }
    return Sl2Lax(F, PoleData((), (), 2, SIGMA_PLUS), coeffs,
                  normalized=True)


# --- assembly ---------------------------------------------------------------


def test_assemble_painleve1():
    sys = painleve1()
    F = sys.field
    L = assemble(sys)
    x = RatFn.gen(F, "x")
    p, q, t = (parse_element(s, F) for s in ("p", "q", "t"))
    assert L.a == RatFn.const(F, p, "x")
    assert L.b == x ** 2 + q * x + q * q + 2 * t
    assert L.c == x - q
    assert L.d == -L.a
    assert not (L.a + L.d)


def test_assemble_constant_sigma3():
    F = QQ
    m = Mat2.sigma3(F.one(), F.zero())
    sys = Sl2Lax(F, PoleData((), (), 0, SIGMA3), {(0, 0): m}, normalized=True)
    L = assemble(sys)
    assert L.a == RatFn.one(QQ, "x") and L.d == -L.a
    assert not L.b and not L.c


def fuchsian3(points=(0, 1, 2)):
    F = QQ
    L1 = mat(F, (("1", "2"), ("3", "-1")))
    L2 = mat(F, (("0", "1"), ("1", "0")))
    # residues must sum to -sigma3
    L3 = -(Mat2.sigma3(F.one(), F.zero()) + L1 + L2)
    pd = PoleData(tuple(Fraction(p) for p in points), (1, 1, 1), -1, SIGMA3)
    return Sl2Lax(F, pd, {(1, 1): L1, (2, 1): L2, (3, 1): L3},
                  normalized=True)


def test_assemble_fuchsian_three_poles():
    sys = fuchsian3()
    L = assemble(sys)
    assert not (L.a + L.d)
    # trace-free with three simple poles; residue at infinity is sigma3
    lead = sys.leading()
    assert lead == Mat2.sigma3(QQ.one(), QQ.zero())
    # b-entry has a nonzero residue at every declared pole
    assert L.b.den.degree() == 3
    for a in sys.poles.points:
        assert not L.b.den(a)
    # a-entry residue vanishes at x=1 (L2 has zero diagonal), so it reduces
    assert L.a.den.degree() == 2


def test_pole_collision_rejected():
    with pytest.raises(PoleCollision):
        PoleData((Fraction(1), Fraction(1)), (1, 1), 0, SIGMA3)


# --- hamiltonians -----------------------------------------------------------


def test_hamiltonians_generic_quadratic():
    F = tower("u0", "v0", "w0", "u1", "v1", "w1")
    coeffs = {
        (0, 2): mat(F, (("0", "1"), ("0", "0"))),
        (0, 1): mat(F, (("u1", "v1"), ("w1", "-u1"))),
        (0, 0): mat(F, (("u0", "v0"), ("w0", "-u0"))),
    }
    sys = Sl2Lax(F, PoleData((), (), 2, SIGMA_PLUS), coeffs)
    H = hamiltonians(sys)
    expect = {
        (0, 0): "2*(u0^2 + v0*w0)",
        (0, 1): "2*(2*u1*u0 + v1*w0 + w1*v0)",
        (0, 2): "2*(w0 + u1^2 + v1*w1)",
        (0, 3): "2*w1",
    }
    assert set(H.entries) == set(expect)
    for key, s in expect.items():
        assert H.value(*key) == parse_element(s, F), key


def test_hamiltonians_constant_sigma3():
    F = QQ
    m = Mat2.sigma3(F.one(), F.zero())
    sys = Sl2Lax(F, PoleData((), (), 0, SIGMA3), {(0, 0): m})
    H = hamiltonians(sys)
    assert H.entries == {(0, 0): Fraction(2)}


def test_hamiltonian_darboux_painleve1():
    sys = painleve1()
    H = hamiltonians(sys)
    expect = parse_element("2*p^2 - 2*q^3 - 4*t*q", sys.field)
    assert H.value(0, 0) == expect


def test_reassembly_invariant():
    for sys in (painleve1(), fuchsian3()):
        L = assemble(sys)
        H = hamiltonians(sys)
        assert H.reassemble() == (L * L).trace()


# --- casimir classification --------------------------------------------------


def test_classify_painleve1():
    flags = classify_casimirs(hamiltonians(painleve1()))
    assert flags[(0, 2)] == "casimir"
    assert flags[(0, 3)] == "casimir"
    assert flags[(0, 0)] == "dynamical"
    assert flags[(0, 1)] == "dynamical"


def test_classify_simple_finite_pole():
    F = QQ
    pd = PoleData((Fraction(0),), (1,), -1, SIGMA3)
    sys = Sl2Lax(F, pd, {(1, 1): -Mat2.sigma3(F.one(), F.zero())})
    # single pole balancing the residue at infinity
    H = hamiltonians(sys)
    flags = H.classify()
    assert flags == {(1, 1): "dynamical", (1, 2): "casimir"}


def test_classify_fuchsian_four_poles_dynamical_count():
    F = QQ
    mats = [mat(F, (("1", "2"), ("3", "-1"))),
            mat(F, (("0", "1"), ("1", "0"))),
            mat(F, (("2", "1"), ("-1", "-2")))]
    last = -(Mat2.sigma3(F.one(), F.zero()) + mats[0] + mats[1] + mats[2])
    pd = PoleData(tuple(Fraction(k) for k in (0, 1, 2, 3)), (1, 1, 1, 1),
                  -1, SIGMA3)
    sys = Sl2Lax(F, pd, {(1, 1): mats[0], (2, 1): mats[1], (3, 1): mats[2],
                         (4, 1): last})
    H = hamiltonians(sys)
    assert H.dynamical_count() == 4


# --- lax flows preserve the invariants ---------------------------------------


def first_order_deformation(sys, nu, i):
    """Tr((L + eps [A, L])^2) expanded exactly to first order in a
    nilpotent eps, via a two-term truncated series."""
    L = assemble(sys)
    A = auxiliary_matrix(sys, nu, i)
    B = A.commutator(L)
    zero = RatFn.zero(sys.field, sys.var)
    jet = Mat2(*(HbarSeries(0, [l, b], 2, zero)
                 for l, b in zip(L.entries(), B.entries())))
    return (jet * jet).trace()


def test_flow_preserves_trace_invariant_painleve1():
    sys = painleve1()
    t2 = first_order_deformation(sys, 0, 0)
    assert t2.coeff(0) == (assemble(sys) * assemble(sys)).trace()
    assert not t2.coeff(1)


def test_flow_preserves_trace_invariant_fuchsian():
    sys = fuchsian3()
    for nu in (1, 2, 3):
        t2 = first_order_deformation(sys, nu, 1)
        assert not t2.coeff(1)


# --- auxiliary matrices -------------------------------------------------------


def test_auxiliary_painleve1_base():
    sys = painleve1()
    F = sys.field
    A = auxiliary_matrix(sys, 0, 0)
    x = RatFn.gen(F, "x")
    q = parse_element("q", F)
    # 2 (sigma_plus x + L_{0,1})
    assert A.a == RatFn.zero(F, "x")
    assert A.b == 2 * x + 2 * q
    assert A.c == RatFn.const(F, F.coerce(2), "x")


def test_auxiliary_painleve1_beta_shift():
    sys = painleve1()
    F = sys.field
    q = parse_element("q", F)
    A = auxiliary_matrix(sys, 0, 0, beta=q)
    x = RatFn.gen(F, "x")
    assert A.b == 2 * x + 4 * q
    assert A.c == RatFn.const(F, F.coerce(2), "x")


def test_auxiliary_simple_pole():
    sys = fuchsian3()
    A = auxiliary_matrix(sys, 1, 1)
    x = RatFn.gen(QQ, "x")
    L11 = sys.coeff(1, 1)
    assert A == L11.map(lambda e: -2 * e / x)


def test_auxiliary_sigma_shift_matches_polar_cancellation():
    # r0 = 0 with a double pole at the origin; sigma = 2 flips the sign of
    # the deepest polar term: A = x L0 + L1 - L2/x
    F = QQ
    L0 = mat(F, (("1", "0"), ("0", "-1")))
    L1 = mat(F, (("0", "2"), ("5", "0")))
    L2 = mat(F, (("3", "1"), ("4", "-3")))
    pd = PoleData((Fraction(0),), (2,), 0, SIGMA3)
    sys = Sl2Lax(F, pd, {(0, 0): L0, (1, 1): L1, (1, 2): L2})
    A = auxiliary_matrix(sys, 1, 2, sigma=2)
    x = RatFn.gen(F, "x")
    expect_b = L0.b * x + L1.b - L2.b / x
    assert A.b == expect_b
    expect_a = L0.a * x + L1.a - L2.a / x
    assert A.a == expect_a


def test_auxiliary_index_errors():
    sys = painleve1()
    with pytest.raises(IndexOutOfRange):
        auxiliary_matrix(sys, 0, 2)
    with pytest.raises(IndexOutOfRange):
        auxiliary_matrix(sys, 1, 1)
    with pytest.raises(IndexOutOfRange):
        auxiliary_matrix(sys, 0, 0, sigma=1)


# --- darboux charts -----------------------------------------------------------


def test_darboux_painleve1():
    sys = painleve1()
    chart = darboux(sys)
    assert len(chart) == 1
    q, p = chart[0]
    assert q == parse_element("q", sys.field)
    assert p == parse_element("p", sys.field)


def test_darboux_painleve2_form():
    # generic x^2 system normalized so entry (2,1) is monic in x
    F = tower("u0", "v0", "w0", "v1")
    coeffs = {
        (0, 2): mat(F, (("1", "0"), ("0", "-1"))),
        (0, 1): mat(F, (("0", "v1"), ("1", "0"))),
        (0, 0): mat(F, (("u0", "v0"), ("w0", "-u0"))),
    }
    sys = Sl2Lax(F, PoleData((), (), 2, SIGMA3), coeffs, normalized=True)
    chart = darboux(sys)
    assert len(chart) == 1
    q, p = chart[0]
    assert q == parse_element("-w0", F)
    assert p == q * q + parse_element("u0", F)


def test_darboux_degenerate():
    F = QQ
    sys = Sl2Lax(F, PoleData((), (), 1, SIGMA3),
                 {(0, 1): Mat2.sigma3(F.one(), F.zero())})
    with pytest.raises(DegenerateOrbit):
        darboux(sys)


def test_darboux_chart_identities():
    sys = painleve1()
    L = assemble(sys)
    for q, p in darboux(sys):
        assert not L.c(q)
        # (p - L11)(p - L22) - L12 L21 at x = q
        det = (p - L.a(q)) * (p - L.d(q)) - L.b(q) * L.c(q)
        assert not det


# --- orbit representatives -----------------------------------------------------


def test_orbit_torus_normalization():
    F = QQ
    target = mat(F, (("0", "4"), ("9", "0")))
    pd = PoleData((Fraction(0),), (1,), 1, SIGMA3)
    sys = Sl2Lax(F, pd, {(0, 1): Mat2.sigma3(F.one(), F.zero()),
                         (0, 0): mat(F, (("1", "1"), ("1", "-1"))),
                         (1, 1): target})
    out = orbit_representative(sys, (1, 1))
    m = out.coeff(1, 1)
    assert m.b == 1 and m.c == 36
    # conjugation preserves the full trace invariant
    L0, L1 = assemble(sys), assemble(out)
    assert (L0 * L0).trace() == (L1 * L1).trace()


def test_orbit_sigma_plus_identity():
    sys = painleve1()
    out = orbit_representative(sys, (0, 1))
    assert out.coeff(0, 1) == sys.coeff(0, 1)


def test_orbit_nongeneric():
    F = QQ
    pd = PoleData((Fraction(0),), (1,), 1, SIGMA3)
    sys = Sl2Lax(F, pd, {(0, 1): Mat2.sigma3(F.one(), F.zero()),
                         (1, 1): mat(F, (("5", "0"), ("0", "-5")))})
    with pytest.raises(NonGenericOrbit):
        orbit_representative(sys, (1, 1))


# --- companion systems from a curve --------------------------------------------


def test_from_quadratic_airy():
    Q = RatFn.gen(QQ, "x")
    sys = from_quadratic(Q)
    L = assemble(sys)
    assert L.b == Q and L.c == RatFn.one(QQ, "x")
    assert not L.a and not L.d
    assert sys.poles.r0 == 1 and sys.poles.kind == SIGMA_PLUS


def test_from_quadratic_det():
    x = RatFn.gen(QQ, "x")
    Q = x * x + 1
    L = assemble(from_quadratic(Q))
    assert L.det() == -Q


def test_from_quadratic_pole_data():
    x = RatFn.gen(QQ, "x")
    sys = from_quadratic(1 / x)
    assert sys.poles.n == 1
    assert sys.poles.orders == (1,)
    assert sys.poles.points == (Fraction(0),)


rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 9))


@st.composite
def random_curves(draw):
    x = RatFn.gen(QQ, "x")
    f = RatFn(Poly(QQ, draw(st.lists(rationals, min_size=0, max_size=4)), "x"))
    for _ in range(draw(st.integers(0, 2))):
        p = draw(st.integers(-3, 3))
        k = draw(st.integers(1, 3))
        c = draw(rationals)
        f = f + c / (x - p) ** k
    return f


@settings(max_examples=50, deadline=None)
@given(random_curves())
def test_from_quadratic_det_is_minus_curve(Q):
    if not Q:
        return
    assert assemble(from_quadratic(Q)).det() == -Q
