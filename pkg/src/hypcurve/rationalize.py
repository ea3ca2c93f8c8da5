"""Rational definite pencils for curves defined over Q.

A pencil in the *monomial frame* satisfies ``(xA + yB + zC) m = f v`` where
``m`` is the vector of all monomials of degree ``d-1`` and ``v`` a constant
vector.  These conditions are linear with rational coefficients, so a float
solution (from the Dixon construction with a contact-free interlacer) can be
moved to a nearby rational one: parametrize the exact solution space by its
free variables and round only those.  The identity then holds exactly.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .dixon import LinearPencil
from .errors import InputError, NumericalError
from .forms import (
    DEFAULT_PRECISION,
    TernaryForm,
    divide,
    monomials,
    to_fraction,
    to_mpf,
)
from .hyperbolic import cone_contains
from .linalg import exact_inertia, rref


class RationalizationFailed(NumericalError):
    """No rounding within the denominator bounds kept the pencil valid."""

    def __init__(self, message: str, nearest: RationalPencil | None = None):
        super().__init__(message)
        self.nearest = nearest


@dataclass
class RationalPencil:
    """Exact pencil with its kernel certificate: ``(xA+yB+zC) m = f v``."""

    A: list[list[Fraction]]
    B: list[list[Fraction]]
    C: list[list[Fraction]]
    v: list[Fraction]
    degree: int
    max_denominator: int | None = None
    extras: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.A)

    def pencil(self) -> LinearPencil:
        return LinearPencil(self.A, self.B, self.C, gamma=None, precision=None)

    @classmethod
    def from_pencil(cls, pencil: LinearPencil, degree: int) -> RationalPencil:
        """Wrap an exact pencil of any size; ``v`` stays empty (no kernel certificate)."""
        if not pencil.exact:
            raise InputError("pencil entries must be rational")
        return cls(pencil.A, pencil.B, pencil.C, [], degree)

    def monomial_vector(self) -> list[TernaryForm]:
        return [TernaryForm(self.degree - 1, {m: 1}) for m in monomials(self.degree - 1)]

    def to_json(self) -> dict:
        def enc(c):
            c = Fraction(c)
            return {"num": str(c.numerator), "den": str(c.denominator)}

        return {
            "size": self.size,
            "degree": self.degree,
            "A": [[enc(c) for c in row] for row in self.A],
            "B": [[enc(c) for c in row] for row in self.B],
            "C": [[enc(c) for c in row] for row in self.C],
            "v": [enc(c) for c in self.v],
            "max_denominator": self.max_denominator,
            "mode": "exact",
        }

    @classmethod
    def from_json(cls, data: dict) -> RationalPencil:
        def dec(c):
            if isinstance(c, dict):
                return Fraction(int(c["num"]), int(c["den"]))
            return Fraction(str(c))

        mats = [[[dec(c) for c in row] for row in data[k]] for k in ("A", "B", "C")]
        return cls(*mats, [dec(c) for c in data["v"]], int(data["degree"]),
                   data.get("max_denominator"))


# ---------------------------------------------------------------- the linear system


def _sym_index(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def rational_system(f: TernaryForm, fixed_v: Sequence | None = None):
    """Rows and right-hand side of ``(xA+yB+zC) m - f v = 0`` over Q.

    Unknowns: upper triangles of A, B, C (row-major), then ``v`` unless it is
    fixed, in which case ``f v`` moves to the right-hand side.
    """
    if not f.exact:
        raise InputError("the curve must have rational coefficients")
    d = f.degree
    mons = monomials(d - 1)
    n = len(mons)
    pairs = _sym_index(n)
    out_mons = monomials(d)
    out_idx = {m: i for i, m in enumerate(out_mons)}
    nsym = len(pairs)
    nunk = 3 * nsym + (0 if fixed_v is not None else n)
    rows, rhs = [], []
    for i in range(n):
        block = [[Fraction(0)] * nunk for _ in out_mons]
        r = [Fraction(0)] * len(out_mons)
        for p, (a, b) in enumerate(pairs):
            if i not in (a, b):
                continue
            j = b if a == i else a
            for var in range(3):
                e = list(mons[j])
                e[var] += 1
                block[out_idx[tuple(e)]][var * nsym + p] += 1
        for m, c in f.coeffs.items():
            if fixed_v is None:
                block[out_idx[m]][3 * nsym + i] -= c
            else:
                r[out_idx[m]] += c * Fraction(fixed_v[i])
        rows.extend(block)
        rhs.extend(r)
    return rows, rhs, pairs


def _unpack(sol: Sequence, n: int, pairs, fixed_v) -> tuple[list, list, list, list]:
    nsym = len(pairs)
    mats = []
    for var in range(3):
        M = [[Fraction(0)] * n for _ in range(n)]
        for p, (a, b) in enumerate(pairs):
            M[a][b] = M[b][a] = sol[var * nsym + p]
        mats.append(M)
    v = list(fixed_v) if fixed_v is not None else list(sol[3 * nsym:])
    return mats[0], mats[1], mats[2], v


def _pack(A, B, C, v, pairs, fixed_v) -> list:
    out = [M[a][b] for M in (A, B, C) for a, b in pairs]
    if fixed_v is None:
        out += list(v)
    return out


# ---------------------------------------------------------------- monomial frame


def to_monomial_frame(pencil: LinearPencil, basis: Sequence[TernaryForm], f: TernaryForm):
    """``(T^t M T, v)`` for the basis coefficient matrix ``T`` (rows = basis forms)."""
    P = pencil.precision or DEFAULT_PRECISION
    d = f.degree
    mons = monomials(d - 1)
    if len(basis) != len(mons) or pencil.size != len(mons):
        raise InputError("the monomial frame needs a contact-free pencil of size C(d+1,2)")
    with mpmath.workprec(P):
        T = [[to_mpf(b.coefficient(m)) for m in mons] for b in basis]
        Mp = pencil.congruence(T)
        ff = f.to_float(P) if f.exact else f
        rng = random.Random(7)
        vs = []
        for _ in range(2):
            p = [mpmath.mpf(rng.gauss(0, 1)) for _ in range(3)]
            mv = [TernaryForm(d - 1, {m: 1}, P)(p) for m in mons]
            Mpp = Mp(p)
            fp = ff(p)
            vs.append([mpmath.fsum(Mpp[i][j] * mv[j] for j in range(len(mons))) / fp
                       for i in range(len(mons))])
        spread = max(abs(a - b) for a, b in zip(*vs))
        scale = max(abs(c) for c in vs[0])
        if spread > mpmath.mpf("1e-10") * scale:
            raise InputError("pencil does not satisfy M m = f v in the monomial frame")
        return Mp, vs[0]


# ---------------------------------------------------------------- main operations


def rationalize_pencil(f: TernaryForm, e: Sequence, pencil: LinearPencil | RationalPencil,
                       basis: Sequence[TernaryForm] | None = None, max_denominator: int = 1000,
                       v: Sequence | None = None, fixed_v: Sequence | None = None,
                       doublings: int = 3, samples: int = 32, seed: int = 0) -> RationalPencil:
    """Nearby rational solution of the monomial-frame system that stays definite at ``e``.

    ``basis`` expresses a Dixon pencil in the monomial frame; if omitted the
    pencil is assumed to be in that frame already and ``v`` must be given.
    ``fixed_v`` pins ``v`` to an exact vector (the float solution is rescaled
    to match it).
    """
    if not f.exact:
        raise InputError("the curve must have rational coefficients")
    d = f.degree
    n = len(monomials(d - 1))
    if isinstance(pencil, RationalPencil):
        if verify_rational(f, e, pencil, samples=samples, seed=seed):
            return pencil
        Mp, vf = pencil.pencil().to_float(DEFAULT_PRECISION), [to_mpf(c) for c in pencil.v]
    elif basis is not None:
        Mp, vf = to_monomial_frame(pencil, basis, f)
    else:
        if v is None:
            raise InputError("a pencil outside the monomial frame needs its basis")
        if pencil.exact and all(isinstance(c, (int, Fraction)) for c in v):
            rp = RationalPencil(pencil.A, pencil.B, pencil.C, [Fraction(c) for c in v], d)
            if verify_rational(f, e, rp, samples=samples, seed=seed):
                return rp
        Mp, vf = pencil.to_float(pencil.precision or DEFAULT_PRECISION), [to_mpf(c) for c in v]
    if Mp.size != n:
        raise InputError(f"pencil size {Mp.size} differs from C(d+1,2) = {n}")
    P = Mp.precision or DEFAULT_PRECISION
    with mpmath.workprec(P):
        if fixed_v is not None:
            fixed_v = [Fraction(c) for c in fixed_v]
            num = mpmath.fsum(to_mpf(a) * b for a, b in zip(fixed_v, vf))
            den = mpmath.fsum(b * b for b in vf)
            scale = num / den
        else:
            scale = 1 / max(max(abs(c) for M in Mp.matrices() for row in M for c in row),
                            max(abs(c) for c in vf))
        A, B, C = ([[c * scale for c in row] for row in M] for M in Mp.matrices())
        vv = [c * scale for c in vf]
    rows, rhs, pairs = rational_system(f, fixed_v)
    target = _pack(A, B, C, vv, pairs, fixed_v)
    red, pivots = rref([r + [b] for r, b in zip(rows, rhs)])
    nunk = len(rows[0])
    if nunk in pivots:
        raise InputError("the linear system has no solution with this v")
    free = [c for c in range(nunk) if c not in pivots]
    nearest = None
    bound = max_denominator
    for _ in range(doublings + 1):
        values = {c: to_fraction(target[c]).limit_denominator(bound) for c in free}
        sol = [Fraction(0)] * nunk
        for c in free:
            sol[c] = values[c]
        for i, pc in enumerate(pivots):
            row = red[i]
            sol[pc] = row[nunk] - sum((row[c] * values[c] for c in free if row[c]), Fraction(0))
        rp = RationalPencil(*_unpack(sol, n, pairs, fixed_v), d, bound)
        nearest = rp
        if verify_rational(f, e, rp, samples=samples, seed=seed):
            return rp
        bound *= 2
    raise RationalizationFailed(
        f"no valid rounding with denominators up to {bound // 2}", nearest)


def _exact_e(e: Sequence) -> list[Fraction]:
    return [Fraction(c) if isinstance(c, (int, Fraction)) else to_fraction(c) for c in e]


def identity_residual(f: TernaryForm, rp: RationalPencil) -> list[TernaryForm]:
    """The forms ``((xA+yB+zC) m - f v)_i``; all zero for a valid certificate."""
    mons = rp.monomial_vector()
    pen = rp.pencil()
    out = []
    for i in range(rp.size):
        acc = f * (-rp.v[i])
        for j in range(rp.size):
            entry = pen.entry(i, j)
            if not entry.is_zero():
                acc = acc + entry * mons[j]
        out.append(acc)
    return out


def verify_rational(f: TernaryForm, e: Sequence, rp: RationalPencil, samples: int = 32,
                    seed: int = 0) -> bool:
    """Exact checks of a rational pencil; the cofactor sign is sampled inside the cone."""
    return not rational_failures(f, e, rp, samples, seed)


def rational_failures(f: TernaryForm, e: Sequence, rp: RationalPencil, samples: int = 32,
                      seed: int = 0) -> list[str]:
    from .certify import pencil_minor_form

    if not f.exact:
        return ["f is not rational"]
    if rp.v and rp.size != len(monomials(f.degree - 1)):
        return ["kernel certificate needs size C(d+1,2)"]
    if rp.size < f.degree:
        return ["pencil is smaller than deg f"]
    ex = _exact_e(e)
    if f(ex) < 0:
        f = -f
    if rp.v and any(not r.is_zero() for r in identity_residual(f, rp)):
        return ["(xA+yB+zC) m != f v"]
    pen = rp.pencil()
    pos, _, _ = exact_inertia(pen(ex))
    if pos != rp.size:
        return ["M(e) is not positive definite"]
    det_form, _ = pencil_minor_form(pen)
    cof, res = divide(det_form, f)
    if res != 0:
        return ["det M is not divisible by f"]
    if cof.degree > 0:
        base = cof(ex)
        if base == 0:
            return ["cofactor vanishes at e"]
        rng = random.Random(seed)
        for _ in range(samples):
            step = Fraction(1, 1)
            dirn = [Fraction(rng.randint(-100, 100), 100) for _ in range(3)]
            for _ in range(12):
                a = [x + step * y for x, y in zip(ex, dirn)]
                if cone_contains(f, ex, a):
                    break
                step /= 2
            else:
                continue
            if cof(a) * base <= 0:
                return ["cofactor changes sign inside the hyperbolicity cone"]
    return []
