from fractions import Fraction

import mpmath
import pytest

from conftest import ELLIPTIC, ELLIPTIC_E, ELLIPTIC_MATRIX, QUADRIC, E1, P, pencil_from_strings
from hypcurve.dixon import LinearPencil
from hypcurve.errors import InputError
from hypcurve.rationalize import (RationalizationFailed, RationalPencil, identity_residual,
                                  rational_failures, rationalize_pencil, to_monomial_frame,
                                  verify_rational)


@pytest.fixture(scope="module")
def elliptic_rational(elliptic_deriv_run):
    s = elliptic_deriv_run.state
    return rationalize_pencil(P(ELLIPTIC), ELLIPTIC_E, elliptic_deriv_run.pencil, basis=s.basis)


def test_elliptic_rationalizes(elliptic_rational):
    rp = elliptic_rational
    assert rp.size == 6
    assert all(isinstance(c, Fraction) for M in (rp.A, rp.B, rp.C) for row in M for c in row)
    assert all(r.is_zero() for r in identity_residual(P(ELLIPTIC), rp))
    assert verify_rational(P(ELLIPTIC), ELLIPTIC_E, rp)


def test_valid_rational_input_returned_unchanged(elliptic_rational):
    assert rationalize_pencil(P(ELLIPTIC), ELLIPTIC_E, elliptic_rational) is elliptic_rational


def test_integer_bound_fails(elliptic_deriv_run):
    s = elliptic_deriv_run.state
    with pytest.raises(RationalizationFailed) as info:
        rationalize_pencil(P(ELLIPTIC), ELLIPTIC_E, elliptic_deriv_run.pencil, basis=s.basis,
                           max_denominator=1, doublings=0)
    assert info.value.nearest is not None
    assert not verify_rational(P(ELLIPTIC), ELLIPTIC_E, info.value.nearest)


def test_quadric_hand_pencil():
    pen = pencil_from_strings([["x", "-y", "-z"], ["-y", "x", "0"], ["-z", "0", "x"]])
    rp = RationalPencil(pen.A, pen.B, pen.C, [Fraction(1), Fraction(0), Fraction(0)], 2)
    assert verify_rational(P(QUADRIC), E1, rp)
    assert rationalize_pencil(P(QUADRIC), E1, pen, v=[1, 0, 0]).A == rp.A
    bad = RationalPencil(pen.A, pen.B, pen.C, [Fraction(0), Fraction(1), Fraction(0)], 2)
    assert not verify_rational(P(QUADRIC), E1, bad)


def test_elliptic_reference_matrix():
    rp = RationalPencil.from_pencil(pencil_from_strings(ELLIPTIC_MATRIX), 3)
    assert verify_rational(P(ELLIPTIC), ELLIPTIC_E, rp)
    bumped = [row[:] for row in ELLIPTIC_MATRIX]
    bumped[1][3] = bumped[3][1] = "-y+z"
    rb = RationalPencil.from_pencil(pencil_from_strings(bumped), 3)
    assert rational_failures(P(ELLIPTIC), ELLIPTIC_E, rb)


def test_bumped_entry_breaks_identity(elliptic_rational):
    rp = elliptic_rational
    A = [row[:] for row in rp.A]
    A[0][1] += 1
    A[1][0] += 1
    bad = RationalPencil(A, rp.B, rp.C, rp.v, rp.degree)
    assert rational_failures(P(ELLIPTIC), ELLIPTIC_E, bad) == ["(xA+yB+zC) m != f v"]


def test_float_curve_rejected():
    with pytest.raises(InputError):
        rationalize_pencil(P(QUADRIC).to_float(128), E1, pencil_from_strings(
            [["x", "-y", "-z"], ["-y", "x", "0"], ["-z", "0", "x"]]), v=[1, 0, 0])


def test_rounding_converges(elliptic_deriv_run):
    f = P(ELLIPTIC)
    s = elliptic_deriv_run.state
    Mp, vf = to_monomial_frame(elliptic_deriv_run.pencil, s.basis, f)
    with mpmath.workprec(Mp.precision):
        scale = 1 / max(max(abs(c) for M in Mp.matrices() for row in M for c in row),
                        max(abs(c) for c in vf))
        target = [c * scale for M in Mp.matrices() for row in M for c in row]
        dists = []
        for bound in (10 ** 3, 10 ** 6, 10 ** 9):
            rp = rationalize_pencil(f, ELLIPTIC_E, elliptic_deriv_run.pencil, basis=s.basis,
                                    max_denominator=bound, doublings=0)
            got = [mpmath.mpf(c.numerator) / c.denominator for M in (rp.A, rp.B, rp.C)
                   for row in M for c in row]
            dists.append(max(abs(a - b) for a, b in zip(got, target)))
    assert dists[2] <= dists[1] <= dists[0]
    assert dists[2] < 1e-6


def test_json_round_trip(elliptic_rational):
    back = RationalPencil.from_json(elliptic_rational.to_json())
    assert back.A == elliptic_rational.A and back.v == elliptic_rational.v
    empty = RationalPencil.from_pencil(pencil_from_strings(ELLIPTIC_MATRIX), 3)
    assert RationalPencil.from_json(empty.to_json()).C == empty.C


def test_float_pencil_cannot_be_wrapped():
    pen = LinearPencil([[1.5]], [[0]], [[0]], precision=64)
    with pytest.raises(InputError):
        RationalPencil.from_pencil(pen, 1)
