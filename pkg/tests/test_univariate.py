import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from hypcurve.forms import UnivariatePoly
from hypcurve.univariate import (bezout_uni, count_real_roots, interlaces, is_real_rooted,
                                 isolate_real_roots)


def U(*asc):
    return UnivariatePoly([Fraction(c) for c in asc])


def from_roots(roots, lead=1):
    p = U(lead)
    for r in roots:
        p = p * U(-Fraction(r), 1)
    return p


def chain_oracle(alphas, betas, strict=False):
    """Sorted-root comparison for alpha_1 <= beta_1 <= alpha_2 <= ..."""
    a, b = sorted(alphas), sorted(betas)
    for i, beta in enumerate(b):
        if strict and not (a[i] < beta < a[i + 1]):
            return False
        if not (a[i] <= beta <= a[i + 1]):
            return False
    return True


def test_no_real_roots():
    assert list(isolate_real_roots(U(1, 0, 1))) == []
    assert count_real_roots(U(1, 0, 1)) == 0


def test_double_root():
    roots = isolate_real_roots(from_roots([1, 1, -3]))
    assert [r.multiplicity for r in roots] == [1, 2]
    assert roots[0].lo <= -3 <= roots[0].hi
    assert roots[1].lo <= 1 <= roots[1].hi


def test_three_simple_roots():
    roots = isolate_real_roots(U(-2, -1, 2, 1))
    assert [r.multiplicity for r in roots] == [1, 1, 1]
    for r, expected in zip(roots, (-2, -1, 1)):
        assert r.lo <= expected <= r.hi
    for r1, r2 in zip(roots, roots[1:]):
        assert r1.hi < r2.lo


def test_float_mode_roots():
    p = from_roots([Fraction(1, 3), Fraction(1, 3), 2]).to_float(256)
    roots = isolate_real_roots(p)
    assert [r.multiplicity for r in roots] == [2, 1]
    with mpmath.workprec(256):
        assert abs(roots[0].value - mpmath.mpf(1) / 3) < mpmath.mpf(10) ** -30


def test_interlacing_examples():
    assert interlaces(U(-1, 0, 1), U(0, 1), strict=True)
    assert not interlaces(U(-1, 0, 1), U(-2, 1))
    assert interlaces(from_roots([1, -1, -2]), U(0, Fraction(3, 2), 1))


def test_bezout_examples():
    assert bezout_uni(U(-1, 0, 1), U(0, 1)).entries == [[1, 0], [0, 1]]
    B = bezout_uni(U(1, 0, 1), U(0, 1))
    assert B.entries == [[-1, 0], [0, 1]] and not B.is_psd()
    B = bezout_uni(from_roots([1, 1]), U(-1, 1))
    assert B.entries == [[1, -1], [-1, 1]] and B.rank() == 1


def _random_instance(rng):
    d = rng.randint(2, 5)
    alphas = [Fraction(rng.randint(-12, 12), rng.randint(1, 3)) for _ in range(d)]
    mode = rng.random()
    if mode < 0.4:
        # sample inside the gaps so the pair interlaces
        a = sorted(alphas)
        betas = [a[i] + (a[i + 1] - a[i]) * Fraction(rng.randint(0, 4), 4) for i in range(d - 1)]
    else:
        betas = [Fraction(rng.randint(-12, 12), rng.randint(1, 3)) for _ in range(d - 1)]
    return alphas, betas


def test_psd_iff_interlacing_200_instances():
    rng = random.Random(2024)
    agree = 0
    seen = {True: 0, False: 0}
    for _ in range(200):
        alphas, betas = _random_instance(rng)
        p, q = from_roots(alphas), from_roots(betas, lead=rng.randint(1, 4))
        oracle = chain_oracle(alphas, betas)
        seen[oracle] += 1
        assert bezout_uni(p, q).is_psd() == oracle, (alphas, betas)
        assert interlaces(p, q) == oracle
        agree += 1
    assert agree == 200 and seen[True] >= 40 and seen[False] >= 40


def test_psd_iff_interlacing_float_mode():
    rng = random.Random(7)
    for _ in range(30):
        alphas, betas = _random_instance(rng)
        # keep float instances away from tolerance-level coincidences
        if len(set(alphas) | set(betas)) < len(alphas) + len(betas):
            continue
        p, q = from_roots(alphas).to_float(256), from_roots(betas).to_float(256)
        assert bezout_uni(p, q).is_psd() == chain_oracle(alphas, betas)


def test_rank_with_planted_common_factor():
    rng = random.Random(5)
    for _ in range(40):
        common = [rng.randint(-6, 6) for _ in range(rng.randint(0, 2))]
        pa = [Fraction(rng.randint(-20, 20), 7) for _ in range(rng.randint(1, 3))]
        qb = [Fraction(rng.randint(-20, 20), 11) for _ in range(len(pa) - 1)]
        p, q = from_roots(common + pa), from_roots(common + qb)
        g = p.gcd(q)
        assert bezout_uni(p, q).rank() == p.degree - g.degree


small = st.fractions(min_value=-4, max_value=4, max_denominator=5)


@given(st.lists(small, min_size=3, max_size=5), st.lists(small, min_size=1, max_size=4),
       st.lists(small, min_size=1, max_size=4))
def test_bezout_bilinear(pc, q1c, q2c):
    p = UnivariatePoly(pc + [Fraction(1)])
    d = p.degree
    q1, q2 = UnivariatePoly(q1c[:d]), UnivariatePoly(q2c[:d])
    lhs = bezout_uni(p, q1 + q2).entries
    B1, B2 = bezout_uni(p, q1).entries, bezout_uni(p, q2).entries
    assert lhs == [[B1[i][j] + B2[i][j] for j in range(d)] for i in range(d)]
    assert all(lhs[i][j] == lhs[j][i] for i in range(d) for j in range(d))


@given(st.lists(st.integers(-6, 6), min_size=1, max_size=5))
def test_root_count_matches_factorization(roots):
    p = from_roots(roots)
    assert is_real_rooted(p)
    assert isolate_real_roots(p).count() == len(roots)
    mults = {r: roots.count(r) for r in roots}
    assert sorted(r.multiplicity for r in isolate_real_roots(p)) == sorted(mults.values())


def test_bezout_rejects_degree():
    with pytest.raises(ValueError):
        bezout_uni(U(0, 1), U(0, 1))
