from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import CUBIC, P
from hypcurve.errors import InputError
from hypcurve.forms import (TernaryForm, UnivariatePoly, dir_derivative, divide, form_from_json,
                            form_to_json, monomials, restrict)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def rational_forms(draw, max_degree=4):
    d = draw(st.integers(1, max_degree))
    coeffs = {m: draw(fractions) for m in monomials(d)}
    return TernaryForm(d, coeffs)


vectors = st.tuples(fractions, fractions, fractions)


def U(*asc):
    return UnivariatePoly([Fraction(c) for c in asc])


def test_restrict_lorentz_to_unit_roots():
    assert restrict(P("x^2-y^2-z^2"), (1, 0, 0), (0, 1, 0)) == U(-1, 0, 1)


def test_restrict_through_e_itself():
    assert restrict(P("x^2-y^2-z^2"), (1, 0, 0), (1, 0, 0)) == U(1, 2, 1)


def test_restrict_cubic():
    p = restrict(P(CUBIC), (1, 0, 0), (0, 1, 0))
    assert p == U(-2, -1, 2, 1)
    assert p == U(-1, 1) * U(1, 1) * U(2, 1)


def test_restrict_rejects_mixed_modes():
    f = P("x^2-y^2").to_float(128)
    with pytest.raises(InputError):
        restrict(f, (Fraction(1), 0, 0), (0, Fraction(1), 0))


def test_dir_derivative_examples():
    assert dir_derivative(P("x^2-y^2-z^2"), (0, 0, 1)) == P("-2*z")
    one = dir_derivative(P("x"), (1, 0, 0))
    assert one.degree == 0 and one.coefficient((0, 0, 0)) == 1
    assert dir_derivative(P(CUBIC), (1, 0, 0)) == P("3*x^2+4*x*y-y^2-z^2")


def test_divide_exact_quotient():
    q, res = divide(P("x^2-y^2-z^2") * P("x"), P("x"))
    assert q == P("x^2-y^2-z^2") and res == 0


def test_divide_obstructed():
    _, res = divide(P(CUBIC), P("x"))
    assert res > 1e-3


def test_divide_cubic_by_itself_times_line():
    fc = P(CUBIC)
    q, res = divide(fc * P("2*x-y") * Fraction(24, 125), fc)
    assert res == 0
    assert q == P("2*x-y") * Fraction(24, 125)


def test_divide_float_mode():
    f = (P("x^2-y^2-z^2") * P("x+2*y")).to_float(200)
    q, res = divide(f, P("x+2*y").to_float(200))
    assert res < 1e-50
    assert (q - P("x^2-y^2-z^2").to_float(200)).max_abs() < 1e-50


def test_divide_by_zero_form():
    with pytest.raises(InputError):
        divide(P("x^2"), TernaryForm.zero(1))


def test_parse_and_json_roundtrip():
    f = P("x^3 + 2*x^2*y - x*z^2 - 3/7*y^3")
    assert form_from_json(form_to_json(f)) == f
    g = f.to_float(128)
    assert form_from_json(form_to_json(g)) == g


@given(rational_forms(), vectors, vectors)
def test_restrict_endpoints(f, e, v):
    p = restrict(f, e, v)
    assert p(0) == f(v)
    assert p.degree <= f.degree
    if f(e) != 0:
        assert p.degree == f.degree and p.leading == f(e)


@given(rational_forms())
def test_euler_identity(f):
    X, Y, Z = (TernaryForm.variable(i) for i in range(3))
    lhs = X * f.partial(0) + Y * f.partial(1) + Z * f.partial(2)
    assert lhs == f * f.degree


@given(rational_forms(3), rational_forms(2))
def test_divide_remultiply(a, b):
    if b.is_zero():
        return
    q, res = divide(a * b, b)
    assert res == 0
    assert q * b == a * b


@given(rational_forms(3), vectors)
def test_dir_derivative_matches_gradient(f, e):
    grad = f.gradient()
    expected = grad[0] * e[0] + grad[1] * e[1] + grad[2] * e[2]
    assert dir_derivative(f, e) == expected
