import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covers.errors import InputError, InvariantViolation
from covers.symfunc import (
    ONE_PLUS_T,
    PolynomialQ,
    RationalFunction1V,
    SymLaurent,
    T,
    check_consistency,
    egf_values,
    expand_to_degree,
    from_json,
    interpolate_Fn,
    parse_egf_latex,
    parse_latex,
    specialize_egf,
    to_json,
    to_latex,
    to_text,
    truncated_multiply,
)

coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def laurents(draw, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = {k: draw(st.integers(-3, 3)) for k in draw(st.sets(st.integers(1, 5), max_size=3))}
        terms[tuple(sorted((k, e) for k, e in exps.items() if e))] = draw(coeffs)
    return SymLaurent(terms)


@settings(max_examples=100, deadline=None)
@given(laurents(), laurents(), laurents())
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == SymLaurent()
    assert a * SymLaurent.one() == a


@settings(max_examples=100, deadline=None)
@given(laurents())
def test_format_round_trips(x):
    assert from_json(to_json(x)) == x
    assert parse_latex(to_latex(x)) == x if x else True


@settings(max_examples=60, deadline=None)
@given(laurents(3), laurents(3))
def test_expansion_is_a_ring_map(a, b):
    N = 4
    lhs = expand_to_degree(a * b, N)
    rhs = truncated_multiply(expand_to_degree(a, N), expand_to_degree(b, N))
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(laurents(3))
def test_numeric_routes_agree(x):
    check_consistency(x, 6)


def test_inverse_power_sum_expansion():
    # 1 / P_1 = 1 - p_1 + p_1^2 - ...
    s = expand_to_degree(SymLaurent.monomial({1: -1}), 3)
    assert s.terms == {(): 1, (1,): -1, (1, 1): 1, (1, 1, 1): -1}
    # P_2^2 = 1 + 2 p_2 + p_2^2
    s = expand_to_degree(SymLaurent.monomial({2: 2}), 4)
    assert s.terms == {(): 1, (2,): 2, (2, 2): 1}


def test_text_format():
    x = SymLaurent.monomial({1: 2, 2: -1}, Fraction(-1, 2)) + SymLaurent.monomial({}, Fraction(-1, 2))
    assert to_text(x) == "-P1^2/(2 P2) - 1/2"
    assert to_text(SymLaurent()) == "0"


def test_parse_latex_forms():
    x = parse_latex(r"\frac{1}{12} \left(-\frac{P_1^3}{P_2^2}-\frac{1}{P_1}\right)")
    assert x == SymLaurent({((1, 3), (2, -2)): Fraction(-1, 12), ((1, -1),): Fraction(-1, 12)})
    y = parse_latex(r"-\frac{{P_1}^4}{16 {P_2}^3}+\frac{P_2 P_5}{10 P_{10}}")
    assert y == SymLaurent({((1, 4), (2, -3)): Fraction(-1, 16), ((2, 1), (5, 1), (10, -1)): Fraction(1, 10)})
    with pytest.raises(InputError):
        parse_latex(r"\frac{Q_1}{2}")


def test_specialization():
    # P_1^2 / P_2 -> (1 + t)^2
    f = specialize_egf(SymLaurent.monomial({1: 2, 2: -1}))
    assert f == RationalFunction1V.make(ONE_PLUS_T ** 2, PolynomialQ([1]))
    f = specialize_egf(SymLaurent.monomial({1: -1}))
    assert egf_values(f, 4) == [1, -1, 2, -6, 24]


def test_rational_normalization():
    a = RationalFunction1V.make(T * ONE_PLUS_T, ONE_PLUS_T ** 2)
    b = RationalFunction1V.make(T * 3, ONE_PLUS_T * 3)
    assert a == b
    assert a.den.coeffs[-1] == 1
    with pytest.raises(InputError):
        RationalFunction1V.make(T, PolynomialQ())


def test_factored_text():
    f = parse_egf_latex(r"- \frac{t^2}{12 (1 + t)}\left(6 + 6 t + t^2\right)")
    assert f.factored_text() == "-t^2/(12 (1 + t)) (6 + 6 t + t^2)"
    assert RationalFunction1V.make(PolynomialQ(), ONE_PLUS_T).factored_text() == "0"


def test_taylor():
    f = RationalFunction1V.make(PolynomialQ([1]), PolynomialQ([1, -1]))
    assert f.taylor(5) == [1] * 6
    assert egf_values(f, 5) == [math.factorial(n) for n in range(6)]
    with pytest.raises(InputError):
        RationalFunction1V.make(PolynomialQ([1]), T).taylor(2)


def test_interpolation():
    p = PolynomialQ([1, -2, Fraction(1, 3)])
    pts = [(x, p(x)) for x in range(6)]
    assert interpolate_Fn(pts, 2) == p
    assert interpolate_Fn(pts, 5) == p
    bad = pts[:-1] + [(5, p(5) + 1)]
    with pytest.raises(InvariantViolation):
        interpolate_Fn(bad, 2)
    with pytest.raises(InputError):
        interpolate_Fn(pts[:2], 2)
    with pytest.raises(InputError):
        interpolate_Fn([(1, 0), (1, 1)], 1)


def test_polynomial_division():
    a = PolynomialQ([1, 2, 1])
    q, r = a.divmod(ONE_PLUS_T)
    assert q == ONE_PLUS_T and r == PolynomialQ()
    with pytest.raises(ZeroDivisionError):
        a.divmod(PolynomialQ())
