import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import CUBIC, CUBIC_G, E1, QUARTIC, P
from hypcurve.conics import real_contact_conic_search
from hypcurve.fastnum import eval_form
from hypcurve.forms import TernaryForm, dir_derivative, monomials, restrict
from hypcurve.hyperbolic import (HyperbolicityError, bezout_multi, cone_contains,
                                 extremal_contact_bound, is_hyperbolic, is_interlacer,
                                 random_circle_points, random_directions, wronskian,
                                 wronskian_from_bezout)
from hypcurve.univariate import count_real_roots

X, Y, Z = (TernaryForm.variable(i) for i in range(3))


def rational(rng, lo=-3, hi=3, den=4):
    return Fraction(rng.randint(lo * den, hi * den), den)


def line_positive_at_e(rng):
    return TernaryForm.linear(1 + abs(rational(rng)), rational(rng), rational(rng))


def lorentz(rng):
    a, b = Fraction(rng.randint(1, 16), 4), Fraction(rng.randint(1, 16), 4)
    return X * X - Y * Y * a - Z * Z * b


def timelike(rng):
    a, b = Fraction(rng.randint(1, 16), 4), Fraction(rng.randint(1, 16), 4)
    return X * X - Y * Y * a + Z * Z * b


def random_form(rng, d):
    return TernaryForm(d, {m: rng.randint(-4, 4) for m in monomials(d)})


# examples ---------------------------------------------------------------------

def test_is_hyperbolic_examples():
    assert is_hyperbolic(P("x^2-y^2-z^2"), E1, n=100).hyperbolic
    assert is_hyperbolic(P(CUBIC), E1, n=100).hyperbolic
    res = is_hyperbolic(P("x^2+y^2+z^2"), (0, 1, 0), n=50)
    assert not res.hyperbolic and res.witness is not None


def test_is_hyperbolic_needs_nonzero_at_e():
    with pytest.raises(HyperbolicityError):
        is_hyperbolic(P("y^2-z^2"), E1)


def test_cone_contains_examples():
    f = P("x^2-y^2-z^2")
    assert cone_contains(f, E1, E1)
    assert cone_contains(f, E1, (2, 1, 0))
    assert not cone_contains(f, E1, (0, 1, 0))
    assert cone_contains(f, E1, (1, 1, 0))  # boundary point, closed cone
    assert not cone_contains(f, E1, (-1, 0, 0))


def test_bezout_multi_examples():
    B = bezout_multi(P("x^2-y^2-z^2"), P("x"), E1)
    assert B.entries[0][0] == P("y^2+z^2")
    assert B.entries[0][1].is_zero() and B.entries[1][0].is_zero()
    assert B.entries[1][1] == TernaryForm.constant(1)
    B = bezout_multi(P("x^2-y^2"), P("x"), E1)
    assert B.entries[0][0] == P("y^2") and B.entries[1][1] == TernaryForm.constant(1)


def test_bezout_degree_pattern():
    B = bezout_multi(P(CUBIC), P(CUBIC_G), E1)
    assert B.entries[0][0].degree == 4
    for i in range(3):
        for j in range(3):
            assert B.entries[i][j].degree == 6 - (i + 1 + j + 1)
            assert B.entries[i][j] == B.entries[j][i]


def test_wronskian_examples():
    assert wronskian(P("x^2-y^2-z^2"), P("x"), E1) == P("x^2+y^2+z^2")
    assert wronskian(P(CUBIC), TernaryForm.zero(2), E1).is_zero()


def displayed_wronskian(g110, g101, g020, g011, g002):
    """The quartic W(f_c, g) written out term by term, g normalized with g(e) = 1."""
    terms = {
        (3, 1, 0): 2 * g110, (2, 2, 0): 2 * g110 + 3 * g020 + 1, (0, 4, 0): 2 * g110 - g020,
        (3, 0, 1): 2 * g101, (2, 1, 1): 2 * g101 + 3 * g011, (0, 3, 1): 2 * g101 - g011,
        (1, 3, 0): 4 * g020 + 4, (0, 2, 2): -g020 - g002, (1, 2, 1): 4 * g011,
        (0, 1, 3): -g011, (2, 0, 2): 3 * g002 + 1, (1, 1, 2): 4 * g002, (0, 0, 4): -g002,
        (4, 0, 0): 1,
    }
    return TernaryForm(4, terms)


def test_wronskian_matches_display_for_random_parameters():
    rng = random.Random(17)
    fc = P(CUBIC)
    for _ in range(5):
        g = [rational(rng, den=7) for _ in range(5)]
        gform = TernaryForm(2, {(2, 0, 0): 1, (1, 1, 0): g[0], (1, 0, 1): g[1],
                                (0, 2, 0): g[2], (0, 1, 1): g[3], (0, 0, 2): g[4]})
        assert wronskian(fc, gform, E1) == displayed_wronskian(*g)


def test_interlacer_examples():
    rep = is_interlacer(P(CUBIC), P(CUBIC_G), E1, samples=200)
    assert rep.is_interlacer
    rep = is_interlacer(P("x^2-y^2-z^2"), P("x"), E1, samples=200)
    assert rep.is_interlacer and rep.strict
    rep = is_interlacer(P("x^2-y^2-z^2"), P("y"), E1, samples=200)
    assert not rep.is_interlacer


def test_interlacer_degree_mismatch():
    with pytest.raises(ValueError):
        is_interlacer(P(CUBIC), P("x"), E1)


def test_extremal_bound_table():
    assert [extremal_contact_bound(d) for d in range(2, 7)] == [1, 3, 5, 7, 10]
    with pytest.raises(ValueError):
        extremal_contact_bound(1)


# properties -------------------------------------------------------------------

def test_bezout_wronskian_identity_100_pairs():
    rng = random.Random(99)
    for _ in range(100):
        d = rng.randint(2, 4)
        f = random_form(rng, d) + X ** d * (5 + rng.randint(0, 3))
        g = random_form(rng, d - 1) + X ** (d - 1) * (5 + rng.randint(0, 3))
        B = bezout_multi(f, g, E1)
        assert wronskian_from_bezout(B) == wronskian(f, g, E1)


def _route_lines(f, n=30, seed=0):
    e = [Fraction(1), Fraction(0), Fraction(0)]
    return all(count_real_roots(restrict(f, e, [Fraction(c) for c in v])) == f.degree
               for v in random_directions(n, seed, True))


def _route_bezout(f, n=30, seed=1):
    B = bezout_multi(f, dir_derivative(f, E1), E1)
    return all(B.is_psd_at(y, z) for y, z in random_circle_points(n, seed, True))


def test_sampling_and_bezout_routes_agree():
    rng = random.Random(123)
    for _ in range(100):
        f = lorentz(rng) * line_positive_at_e(rng)
        assert _route_lines(f) and _route_bezout(f)
        assert is_hyperbolic(f, E1, n=20).hyperbolic
    for _ in range(100):
        f = timelike(rng) * line_positive_at_e(rng)
        assert not _route_lines(f) and not _route_bezout(f)
        assert not is_hyperbolic(f, E1, n=20).hyperbolic


def test_cone_midpoints_100_pairs():
    rng = random.Random(21)
    f = P(CUBIC)
    pairs = 0
    while pairs < 100:
        a = (1, rational(rng, -1, 1), rational(rng, -1, 1))
        b = (1, rational(rng, -1, 1), rational(rng, -1, 1))
        if not (cone_contains(f, E1, a) and cone_contains(f, E1, b)):
            continue
        pairs += 1
        mid = tuple((u + v) / 2 for u, v in zip(a, b))
        assert cone_contains(f, E1, mid)


@given(st.fractions(-2, 2, max_denominator=9), st.fractions(-2, 2, max_denominator=9))
def test_cone_is_pointed(y, z):
    f = P("x^2-y^2-z^2")
    a = (1, y, z)
    assert not (cone_contains(f, E1, a) and cone_contains(f, E1, tuple(-c for c in a)))


# conic search -----------------------------------------------------------------

@pytest.fixture(scope="module")
def symmetric_quartic():
    f = (X * X + Y * Y - Z * Z) * (X * X + Y * Y - Z * Z * 4) + P("x^3*z+x*y^2*z") * Fraction(1, 10)
    return f, real_contact_conic_search(f, (0, 0, 1))


@pytest.fixture(scope="module")
def nested_ovals_conic():
    f = P(QUARTIC)
    return f, real_contact_conic_search(f, E1)


def _check_contacts(f, res):
    F = f.to_float(53) / f.max_abs()
    q = res.conic
    for p in list(res.inner_contacts) + list(res.outer_contacts):
        pt = np.asarray(p, dtype=float)[None, :]
        assert abs(eval_form(F, pt)[0]) < 1e-12
        assert abs(eval_form(q, pt)[0]) < 1e-12
        gf = np.array([eval_form(F.partial(i), pt)[0] for i in range(3)])
        gq = np.array([eval_form(q.partial(i), pt)[0] for i in range(3)])
        sine = np.linalg.norm(np.cross(gf, gq)) / (np.linalg.norm(gf) * np.linalg.norm(gq))
        assert sine < 1e-6


def test_conic_search_symmetric(symmetric_quartic):
    f, res = symmetric_quartic
    assert res.success
    assert len(res.inner_contacts) == 2 and len(res.outer_contacts) == 2
    assert max(res.tangency_residuals) <= 1e-8
    assert res.conic((0, 0, 1)) > 0
    _check_contacts(f, res)


def test_conic_search_nested_ovals(nested_ovals_conic):
    f, res = nested_ovals_conic
    assert res.success and res.conic.degree == 2
    assert max(res.tangency_residuals) <= 1e-8
    _check_contacts(f, res)
    data = res.to_json()
    assert data["success"] and len(data["trace"]) == 37


def test_conic_search_rejects_cubic():
    with pytest.raises(ValueError):
        real_contact_conic_search(P(CUBIC), E1)


def test_conic_search_rejects_non_hyperbolic():
    f = (X * X + Y * Y - Z * Z) * (X * X - Y * Y + Z * Z * 4)
    with pytest.raises(HyperbolicityError):
        real_contact_conic_search(f, (0, 0, 1))
