import cmath
import itertools
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from pdnf.algebra import (
    I,
    ONE,
    ZERO,
    ExactComplex,
    IncompatibleOperandsError,
    InvariantViolation,
    LinearPart,
    PeriodicSystem,
    TaylorFourierSeries,
    VectorSeries,
    compose,
    derive,
    format_scalar,
    modulus,
    parse_approx,
    parse_exact,
    series_arith,
    substitute,
    succ_compare,
)
from pdnf.algebra.multiindex import multi_indices, multi_indices_upto, succ_key

# -- strategies -------------------------------------------------------------
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)
gaussians = st.builds(ExactComplex, rationals, rationals)
nonzero_gaussians = gaussians.filter(bool)


def S(n, N, terms, exact=True):
    return TaylorFourierSeries(n, N, terms, exact=exact)


@st.composite
def series(draw, n=2, N=4, band=2, max_terms=5):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        d = draw(st.integers(0, N))
        l = draw(st.sampled_from(multi_indices(n, d)))
        terms[(l, draw(st.integers(-band, band)))] = draw(gaussians)
    return S(n, N, terms)


# -- scalars ------------------------------------------------------------------
@pytest.mark.parametrize(
    "text, re, im",
    [
        ("1/2+3/4i", mpq(1, 2), mpq(3, 4)),
        ("i", 0, 1),
        ("-i", 0, -1),
        ("+i", 0, 1),
        ("3", 3, 0),
        ("-2/5i", 0, mpq(-2, 5)),
        (" 1 / 2 - i ", mpq(1, 2), -1),
        ("4/6", mpq(2, 3), 0),
        ("-7-2i", -7, -2),
    ],
)
def test_exact_grammar(text, re, im):
    assert parse_exact(text) == ExactComplex(re, im)


@pytest.mark.parametrize("bad", ["", "1/0", "1/2/3", "abc", "1.5", "1+", "ii", "1+2", "1/-2"])
def test_exact_grammar_rejects(bad):
    with pytest.raises(ValueError):
        parse_exact(bad)


def test_approx_grammar():
    assert parse_approx("1.5-2e-3i") == complex(1.5, -0.002)
    assert parse_approx("-i") == -1j
    with pytest.raises(ValueError):
        parse_approx("nan")


@given(gaussians)
def test_format_parse_roundtrip(z):
    assert parse_exact(format_scalar(z)) == z


@given(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e12))
def test_format_parse_roundtrip_approx(z):
    assert parse_approx(format_scalar(z)) == z


@given(gaussians, gaussians, gaussians)
def test_field_axioms(a, b, c):
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ZERO and a * ONE == a


@given(nonzero_gaussians)
def test_reciprocal(a):
    assert a * a.reciprocal() == ONE
    assert a ** -2 * a ** 2 == ONE


def test_lowest_terms_and_interop():
    z = ExactComplex(Fraction(4, 6), mpq(-3, -9))
    assert z.re == mpq(2, 3) and z.im == mpq(1, 3)
    assert I * I == -ONE
    assert complex(ExactComplex(1, 2)) == 1 + 2j
    assert ExactComplex(1, 0) == 1
    assert (ExactComplex(1, 0) == 1.0 + 0j) is False


def test_modulus_exact_when_rational():
    assert modulus(ExactComplex(3, 4)) == 5
    assert isinstance(modulus(ExactComplex(3, 4)), type(mpq(1)))
    assert modulus(ExactComplex(1, 1)) == pytest.approx(2 ** 0.5)


# -- multi-indices --------------------------------------------------------------
@pytest.mark.parametrize(
    "k, l, expected", [((1, 0), (1, 1), 1), ((1, 1), (2, 0), 1), ((2, 0), (2, 0), 0), ((2, 0), (1, 1), -1)]
)
def test_succ_examples(k, l, expected):
    assert succ_compare(k, l) == expected


def test_succ_length_mismatch():
    with pytest.raises(ValueError):
        succ_compare((1, 0), (1, 0, 0))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_succ_is_total_order(n):
    pool = multi_indices_upto(n, 0, 4)
    for a, b in itertools.product(pool, repeat=2):
        assert succ_compare(a, b) == -succ_compare(b, a)
        assert (succ_compare(a, b) == 0) == (a == b)
    for a, b, c in itertools.product(pool, repeat=3):
        if succ_compare(a, b) == 1 and succ_compare(b, c) == 1:
            assert succ_compare(a, c) == 1


def test_succ_trichotomy_wide():
    pool = multi_indices_upto(4, 0, 6)
    for a, b in itertools.combinations(pool, 2):
        assert succ_compare(a, b) in (1, -1)


def test_succ_key_orders_greatest_first():
    pool = multi_indices_upto(3, 0, 3)
    ordered = sorted(pool, key=succ_key)
    for a, b in zip(ordered, ordered[1:]):
        assert succ_compare(a, b) == 1


# -- series arithmetic ------------------------------------------------------------
def test_monomial_product_and_modes():
    y1, y2 = (TaylorFourierSeries.variable(2, 4, m) for m in range(2))
    assert (y1 * y2).terms == {((1, 1), 0): ONE}
    e = S(2, 4, {((0, 1), 1): 1})
    assert (e * e).terms == {((0, 2), 2): ONE}


def test_exact_cancellation_empty():
    a = S(2, 4, {((1, 0), 0): 1, ((0, 2), 0): I})
    b = S(2, 4, {((1, 0), 0): -1, ((0, 2), 0): -I})
    assert (a + b).is_zero and len(a + b) == 0


def test_no_stored_zeros_and_degree_bound():
    s = S(2, 3, {((1, 0), 0): 0, ((0, 1), 1): 1})
    assert list(s.terms) == [((0, 1), 1)]
    with pytest.raises(ValueError):
        S(2, 3, {((2, 2), 0): 1})
    assert (s * s * s * s).max_degree() is None


def test_incompatible_operands():
    with pytest.raises(IncompatibleOperandsError):
        S(2, 3, {}) + S(3, 3, {})
    with pytest.raises(IncompatibleOperandsError):
        S(2, 3, {}) + S(2, 3, {}, exact=False)
    with pytest.raises(IncompatibleOperandsError):
        series_arith(S(2, 3, {}), 2, "mul")


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_ring_laws(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=40, deadline=None)
@given(series(), series())
def test_product_matches_evaluation(a, b):
    y, phase = [ExactComplex(mpq(1, 3), 1), ExactComplex(-2, mpq(1, 2))], ExactComplex(mpq(3, 5), mpq(4, 5))
    lhs = (a * b).evaluate(y, phase)
    full = S(2, 8, a.terms) * S(2, 8, b.terms)
    assert lhs == full.truncate(4).evaluate(y, phase)


def test_evaluate_negative_modes():
    s = S(1, 2, {((1,), -2): 1})
    t = 0.7
    val = complex(s.to_approx().evaluate([2.0], cmath.exp(1j * t)))
    assert val == pytest.approx(2 * cmath.exp(-2j * t))


# -- composition and derivatives -----------------------------------------------
PHI = VectorSeries.from_terms(2, 4, {((0, 2), 0, 0): I})


def test_compose_untouched_variable():
    F = S(2, 4, {((0, 2), 0): 1})
    assert compose(F, PHI, 4).terms == {((0, 2), 0): ONE}


def test_compose_square_truncated():
    F = S(2, 4, {((2, 0), 0): 1})
    assert compose(F, PHI, 3).terms == {((2, 0), 0): ONE, ((1, 2), 0): 2 * I}
    assert compose(F, PHI, 4).terms == {((2, 0), 0): ONE, ((1, 2), 0): 2 * I, ((0, 4), 0): -ONE}


def test_compose_rejects_low_degree_phi():
    with pytest.raises(ValueError):
        compose(S(2, 3, {}), VectorSeries.from_terms(2, 3, {((1, 0), 0, 0): 1}), 3)


def test_substitute_with_constants():
    F = S(1, 3, {((2,), 0): 1})
    X = VectorSeries([S(1, 3, {((0,), 0): 2, ((1,), 0): 1})])
    assert substitute(F, X, 3).terms == {((0,), 0): ONE * 4, ((1,), 0): ONE * 4, ((2,), 0): ONE}


def test_time_derivative():
    s = S(2, 3, {((1, 1), 2): 1})
    assert s.derivative_t().terms == {((1, 1), 2): 2 * I}
    assert S(2, 3, {((1, 1), 0): 5}).derivative_t().is_zero
    assert derive(s, "time") == s.derivative_t()


def test_jacobian():
    J = derive(PHI, "jacobian")
    assert J[0][1].terms == {((0, 1), 0): 2 * I}
    assert J[0][0].is_zero and J[1][0].is_zero and J[1][1].is_zero


# -- systems --------------------------------------------------------------------
def test_linear_part_and_system():
    lin = LinearPart(("i", "0"), ("1/10",))
    assert lin.exact and not lin.is_diagonal
    assert lin.matrix()[1][0] == ExactComplex(mpq(1, 10))
    Y = lin.as_series(2)
    assert Y[1].terms == {((1, 0), 0): ExactComplex(mpq(1, 10))}


def test_system_rejects_linear_terms():
    F = VectorSeries.from_terms(2, 3, {((1, 0), 0, 0): 1})
    with pytest.raises(InvariantViolation, match=r"j=1, l=\[1, 0\], k=0"):
        PeriodicSystem(LinearPart(("i", "0")), F)


def test_system_rejects_mode_mismatch():
    F = VectorSeries.zero(2, 3, exact=False)
    with pytest.raises(InvariantViolation):
        PeriodicSystem(LinearPart(("i", "0")), F)
