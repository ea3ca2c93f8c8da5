import random
from fractions import Fraction

import mpmath
import pytest

from conftest import CUBIC, CUBIC_G, E1, QUARTIC, QUARTIC_G, P
from hypcurve.curves import (CommonComponentError, ContactData, IntersectionCycle,
                             NotRealContactError, ProjPoint, SingularPointError, branch_expansion,
                             classify_cycle, contact_points_by_jacobian, genericity_check,
                             intersection_cycle)
from hypcurve.forms import TernaryForm, monomials


def cycle_of(points, degrees):
    return IntersectionCycle([(ProjPoint(c), m) for c, m in points], degrees)


def random_form(rng, d):
    while True:
        f = TernaryForm(d, {m: rng.randint(-5, 5) for m in monomials(d)})
        if not f.is_zero():
            return f


@pytest.fixture(scope="module")
def quartic_cycle():
    return intersection_cycle(P(QUARTIC), P(QUARTIC_G))


def test_quartic_divisor(quartic_cycle):
    expected = cycle_of([((4, -5, 0), 4), ((11, 5, 0), 2), ((1, 5, 0), 2),
                         ((7, 10, -10), 2), ((7, 10, 10), 2)], (4, 3))
    assert quartic_cycle.total == 12
    assert quartic_cycle.match(expected, 1e-6)


def test_quartic_classification(quartic_cycle):
    data = classify_cycle(quartic_cycle, E1)
    assert data.r == 6 and data.s == 0
    assert sorted(mu for _, mu in data.contacts) == [1, 1, 1, 1, 2]
    big = next(p for p, mu in data.contacts if mu == 2)
    assert big.distance(ProjPoint((4, -5, 0))) < 1e-20


def test_quadric_and_line():
    cycle = intersection_cycle(P("x^2-y^2-z^2"), P("x"))
    with mpmath.workprec(256):
        i = mpmath.mpc(0, 1)
        expected = cycle_of([((0, 1, i), 1), ((0, 1, -i), 1)], (2, 1))
    assert cycle.match(expected, 1e-40)
    data = classify_cycle(cycle, E1)
    assert data.r == 0 and data.s == 1
    line = data.lines[0]
    assert line(E1) > 0
    assert abs(line.coefficient((0, 1, 0))) < 1e-60 and abs(line.coefficient((0, 0, 1))) < 1e-60


def test_node_with_line():
    cycle = intersection_cycle(P("x*y"), P("x+y"))
    assert cycle.total == 2
    assert len(cycle.points) == 1
    p, m = cycle.points[0]
    assert m == 2 and p.distance(ProjPoint((0, 0, 1))) < 1e-40


def test_simple_real_point_is_rejected():
    cycle = intersection_cycle(P("x^2-y^2-z^2"), P("y"))
    with pytest.raises(NotRealContactError):
        classify_cycle(cycle, E1)


def test_common_component():
    with pytest.raises(CommonComponentError):
        intersection_cycle(P("x^2-y^2"), P("x-y"))


def test_cycle_json_roundtrip(quartic_cycle):
    again = IntersectionCycle.from_json(quartic_cycle.to_json())
    assert again.match(quartic_cycle, 1e-25)


def test_genericity_on_cubic():
    f, g = P(CUBIC), P(CUBIC_G)
    data = classify_cycle(intersection_cycle(f, g), E1)
    assert (data.r, data.s) == (2, 1)
    rep = genericity_check(f, g, data)
    assert rep.G1 and rep.G2 and rep.G3 and rep.ok


def test_genericity_detects_collinear_points():
    pts = [ProjPoint((1, 0, 1)), ProjPoint((1, 1, 1)), ProjPoint((1, 2, 1))]
    data = ContactData([(p, 1) for p in pts], [], [], E1)
    rep = genericity_check(P("x^2-y^2-z^2"), P("x"), data)
    assert not rep.G1
    assert len(rep.witnesses["G1"]) == 1
    assert rep.G2 and rep.G3


def test_jacobian_cross_check(quartic_cycle):
    tangential = contact_points_by_jacobian(P(QUARTIC), P(QUARTIC_G), quartic_cycle)
    assert len(tangential) == 5


def test_branch_of_circle():
    br = branch_expansion(P("x^2+y^2-z^2"), (1, 0, 1), 4)
    assert br.chart == 2 and br.dependent == 0
    with mpmath.workprec(256):
        c = [mpmath.mpf(v) for v in br.coefficients]
        assert abs(c[0] - 1) < 1e-60 and abs(c[1]) < 1e-60
        assert abs(c[2] + mpmath.mpf(1) / 2) < 1e-60
        assert abs(c[4] + mpmath.mpf(1) / 8) < 1e-60


def test_branch_of_line():
    br = branch_expansion(P("x"), (0, 0, 1), 3)
    assert br.dependent == 0
    assert all(abs(c) < 1e-70 for c in br.coefficients)


def test_branch_at_node():
    with pytest.raises(SingularPointError):
        branch_expansion(P("x*y"), (0, 0, 1), 2)


def test_branch_series_vanishes_on_curve():
    f = P(QUARTIC)
    br = branch_expansion(f, (11, 5, 0), 6)
    with mpmath.workprec(256):
        assert max(abs(c) for c in br.series_of(f, 6)) < 1e-40 * f.max_abs()


# property suites -------------------------------------------------------------

def test_bezout_sum_50_random_pairs():
    rng = random.Random(11)
    for _ in range(50):
        d, dp = rng.randint(1, 4), rng.randint(1, 4)
        f, g = random_form(rng, d), random_form(rng, dp)
        try:
            cycle = intersection_cycle(f, g, seed=rng.randint(0, 99))
        except CommonComponentError:
            continue
        assert cycle.total == d * dp
        assert cycle.degrees == (d, dp)


def test_conjugation_closure():
    rng = random.Random(3)
    for _ in range(15):
        f, g = random_form(rng, rng.randint(2, 4)), random_form(rng, rng.randint(2, 3))
        cycle = intersection_cycle(f, g)
        for p, m in cycle.points:
            q = p.conjugate()
            assert any(n == m and q.distance(r) < 1e-40 for r, n in cycle.points)


def test_shear_invariance():
    rng = random.Random(8)
    for _ in range(8):
        f, g = random_form(rng, 3), random_form(rng, 3)
        a = intersection_cycle(f, g, seed=1)
        b = intersection_cycle(f, g, seed=2)
        assert a.match(b, 1e-15)
    a = intersection_cycle(P(QUARTIC), P(QUARTIC_G), seed=5)
    b = intersection_cycle(P(QUARTIC), P(QUARTIC_G), seed=6)
    assert a.match(b, 1e-15)


def test_lines_vanish_on_pairs():
    rng = random.Random(4)
    f = P("x^2-y^2-z^2")
    checked = 0
    for _ in range(10):
        # conics through e = (1,0,0) region that stay inside: x minus a small linear perturbation
        g = P("x") + TernaryForm.linear(0, Fraction(rng.randint(-3, 3), 10),
                                        Fraction(rng.randint(-3, 3), 10))
        data = classify_cycle(intersection_cycle(f, g), E1)
        for (q, qb), line in zip(data.pairs, data.lines):
            with mpmath.workprec(256):
                scale = line.max_abs()
                assert abs(line(q.coords)) <= 1e-25 * scale
                assert abs(line(qb.coords)) <= 1e-25 * scale
                assert line(E1) > 0
            checked += 1
    assert checked == 10


def test_two_r_plus_two_s():
    for f, g in [(P(QUARTIC), P(QUARTIC_G)), (P(CUBIC), P(CUBIC_G)), (P("x^2-y^2-z^2"), P("x"))]:
        data = classify_cycle(intersection_cycle(f, g), E1)
        d = f.degree
        assert 2 * data.r + 2 * data.s == d * (d - 1)
