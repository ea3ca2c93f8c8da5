"""Sum-of-squares factorization ``B(f, g) = S^T A S`` from a full-size pencil.

With ``e = (1, 0, 0)`` and a basis ``a`` of all forms of degree ``d-1`` with
``a_1 = g``, a pencil satisfying ``(xA + yB + zC) a = f * delta_1`` factors the
Bezout matrix of ``f`` and ``g``: expand ``a = a_0 x^{d-1} + ... + a_{d-1}``
with ``a_k`` vectors of forms in ``(y, z)``, put ``a_{d-1}, ..., a_0`` into
the columns of ``S``, and take ``A`` from the pencil.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .dixon import DixonResult, LinearPencil
from .errors import InconsistentInputError, InputError
from .forms import DEFAULT_PRECISION, TernaryForm, dir_derivative, format_form, monomials, to_mpf
from .hyperbolic import bezout_multi, wronskian
from .linalg import exact_inertia, exact_solve, mp_min_eig
from .rationalize import RationalPencil

E1 = (1, 0, 0)


@dataclass
class SosFactor:
    """``S`` is N x d with form entries in (y, z); ``A`` is N x N and positive definite."""

    S: list[list[TernaryForm]]
    A: list[list]
    precision: int | None = None
    basis: list[TernaryForm] | None = None
    pencil: LinearPencil | None = None

    @property
    def exact(self) -> bool:
        return self.precision is None

    def product(self) -> list[list[TernaryForm]]:
        """The d x d matrix ``S^T A S``."""
        n, d = len(self.S), len(self.S[0])
        AS = [[_lincomb([self.A[i][k] for k in range(n)], [self.S[k][j] for k in range(n)])
               for j in range(d)] for i in range(n)]
        return [[_dot([self.S[k][i] for k in range(n)], [AS[k][j] for k in range(n)])
                 for j in range(d)] for i in range(d)]

    def to_json(self) -> dict:
        def num(c):
            if isinstance(c, (int, Fraction)):
                return str(Fraction(c))
            return mpmath.nstr(c, int(self.precision * 0.30103) + 3)

        return {
            "S": [[format_form(s) for s in row] for row in self.S],
            "A": [[num(c) for c in row] for row in self.A],
            "mode": "exact" if self.exact else "float",
            "precision": self.precision,
        }


def _lincomb(coeffs, forms: Sequence[TernaryForm]) -> TernaryForm:
    out = None
    for c, f in zip(coeffs, forms):
        if c == 0 or f.is_zero():
            continue
        out = f * c if out is None else out + f * c
    return out if out is not None else TernaryForm.zero(forms[0].degree, forms[0].precision)


def _dot(u: Sequence[TernaryForm], v: Sequence[TernaryForm]) -> TernaryForm:
    out = None
    for a, b in zip(u, v):
        if a.is_zero() or b.is_zero():
            continue
        out = a * b if out is None else out + a * b
    if out is None:
        return TernaryForm.zero(u[0].degree + v[0].degree, u[0].precision)
    return out


def x_expansion(a: TernaryForm) -> list[TernaryForm]:
    """``[a_0, ..., a_k]`` with ``a = sum_j a_j(y, z) x^{k-j}``."""
    k = a.degree
    parts = [dict() for _ in range(k + 1)]
    for (i, j, l), c in a.coeffs.items():
        parts[k - i][(0, j, l)] = c
    return [TernaryForm(j, parts[j], a.precision) for j in range(k + 1)]


def _relation_residual(f: TernaryForm, pencil: LinearPencil, basis: Sequence[TernaryForm]):
    """``M a - f delta_1`` as a list of forms, with a scale for relative comparison."""
    forms = pencil.forms()
    out = []
    for i, row in enumerate(forms):
        acc = _dot(row, basis)
        if i == 0:
            acc = acc - f
        out.append(acc)
    return out


def _check_relation(f, pencil, basis, tol):
    res = _relation_residual(f, pencil, basis)
    if pencil.exact and f.exact and all(b.exact for b in basis):
        if any(not r.is_zero() for r in res):
            raise InconsistentInputError("pencil relation M a = f delta_1 fails")
        return
    with mpmath.workprec(pencil.precision or DEFAULT_PRECISION):
        scale = to_mpf(f.max_abs())
        worst = max((to_mpf(r.max_abs()) for r in res if not r.is_zero()), default=0)
        if worst > tol * scale:
            raise InconsistentInputError(
                f"pencil relation M a = f delta_1 fails (residual {mpmath.nstr(worst / scale, 3)})")


def _from_dixon(f, g, result: DixonResult):
    state = result.state
    if state.data.r > 0:
        raise InputError("the SOS factorization needs a contact-free interlacer (r = 0)")
    P = result.pencil.precision
    basis = list(state.basis)
    with mpmath.workprec(P):
        gf = g.to_float(P) if g.exact else g
        ratio = _proportionality(basis[0], gf)
        basis = [b / ratio for b in basis]
        pen = result.pencil
        rng = random.Random(3)
        p = [mpmath.mpf(rng.gauss(0, 1)) for _ in range(3)]
        ff = f.to_float(P) if f.exact else f
        M = pen(p)
        lam = mpmath.fsum(M[0][j] * basis[j](p) for j in range(pen.size)) / ff(p)
        mats = [[[c / lam for c in row] for row in X] for X in pen.matrices()]
    return LinearPencil(*mats, gamma=None, precision=P), basis, ff


def _proportionality(a: TernaryForm, b: TernaryForm):
    """The scalar ``c`` with ``a = c b``."""
    m = max(b.coeffs, key=lambda k: abs(b.coeffs[k]))
    return a.coefficient(m) / b.coeffs[m]


def _from_rational(f, g, rp: RationalPencil):
    """Change the monomial frame so that ``a_1 = g`` exactly."""
    mons = monomials(f.degree - 1)
    v = [Fraction(c) for c in rp.v]
    gvec = [Fraction(g.coefficient(m)) for m in mons]
    pivot = next((i for i, c in enumerate(gvec) if c != 0), None)
    if pivot is None or v[pivot] == 0:
        raise InputError("v is not proportional to the coefficients of g")
    c = v[pivot] / gvec[pivot]
    if any(a != c * b for a, b in zip(v, gvec)):
        raise InputError("v is not proportional to the coefficients of g")
    n = len(mons)
    # rows of T are the new basis in monomial coordinates: g first, then unit vectors
    T = [list(gvec)] + [[Fraction(int(i == j)) for i in range(n)] for j in range(n) if j != pivot]
    Tinv = _exact_inverse(T)
    basis = [TernaryForm(f.degree - 1, {m: t for m, t in zip(mons, row) if t}) for row in T]
    mats = []
    for X in rp.pencil().matrices():
        # M_hat = T^{-T} X T^{-1} / c
        XT = [[sum((X[i][k] * Tinv[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
              for i in range(n)]
        mats.append([[sum((Tinv[k][i] * XT[k][j] for k in range(n)), Fraction(0)) / c
                      for j in range(n)] for i in range(n)])
    return LinearPencil(*mats, gamma=None, precision=None), basis, f


def _exact_inverse(T):
    n = len(T)
    cols = [exact_solve(T, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def extract_sos(f: TernaryForm, g: TernaryForm, source, basis: Sequence[TernaryForm] | None = None,
                e: Sequence = E1, tol: float = 1e-10) -> SosFactor:
    """Factor ``B(f, g)`` as ``S^T A S``.

    ``source`` is a :class:`DixonResult` of a contact-free run, a
    :class:`RationalPencil` whose ``v`` is proportional to the coefficients of
    ``g``, or a pencil together with ``basis`` already normalized so that
    ``M a = f delta_1`` and ``a_1 = g``.
    """
    if list(e) != [1, 0, 0]:
        raise InputError("extract_sos expects e = (1, 0, 0); rotate the forms first")
    if f(E1) < 0:
        f, g = -f, -g
    if g(E1) < 0:
        g = -g
    if isinstance(source, DixonResult):
        pencil, basis, f_used = _from_dixon(f, g, source)
    elif isinstance(source, RationalPencil):
        if not (f.exact and g.exact):
            raise InputError("a rational pencil needs rational f and g")
        pencil, basis, f_used = _from_rational(f, g, source)
    else:
        if basis is None:
            raise InputError("a bare pencil needs its basis")
        pencil, basis, f_used = source, list(basis), f
    n = len(monomials(f.degree - 1))
    if pencil.size != n or len(basis) != n:
        raise InputError(f"pencil size must be C(d+1,2) = {n}")
    _check_relation(f_used, pencil, basis, tol)
    d = f.degree
    expansions = [x_expansion(a) for a in basis]
    S = [[exp[d - 1 - j] for j in range(d)] for exp in expansions]
    A = [list(row) for row in pencil.A]
    return SosFactor(S, A, pencil.precision, basis, pencil)


def sos_residual(f: TernaryForm, g: TernaryForm, sf: SosFactor):
    """Largest coefficient of ``B(f, g) - S^T A S`` relative to ``B``."""
    if f(E1) < 0:
        f, g = -f, -g
    if g(E1) < 0:
        g = -g
    if not sf.exact:
        P = sf.precision
        f, g = (f.to_float(P) if f.exact else f), (g.to_float(P) if g.exact else g)
    B = bezout_multi(f, g).entries
    prod = sf.product()
    d = len(B)
    if len(prod) != d:
        raise InputError("shape mismatch between S and B(f, g)")
    worst = 0
    scale = max(b.max_abs() for row in B for b in row if not b.is_zero())
    for i in range(d):
        for j in range(d):
            diff = B[i][j] - prod[i][j]
            if not diff.is_zero():
                worst = max(worst, diff.max_abs())
    return worst / scale if scale else worst


def verify_sos(f: TernaryForm, g: TernaryForm, sf: SosFactor, tol: float = 1e-9) -> bool:
    """Recompute ``B(f, g)`` independently and compare; also require ``A`` positive definite."""
    if len(sf.S) != len(sf.A) or not sf.S or not sf.S[0]:
        return False
    try:
        res = sos_residual(f, g, sf)
    except (InputError, ValueError):
        return False
    if sf.exact:
        if res != 0:
            return False
        pos, _, _ = exact_inertia(sf.A)
        return pos == len(sf.A)
    with mpmath.workprec(sf.precision):
        if res > tol:
            return False
        return mp_min_eig(sf.A) > 0


def derivative_residual(f: TernaryForm, pencil: LinearPencil, basis: Sequence[TernaryForm],
                        points: Sequence[Sequence]):
    """Max of ``|A a + M D_e a - delta_1 D_e f|`` over ``points`` (e = (1,0,0))."""
    df = dir_derivative(f, E1)
    da = [dir_derivative(a, E1) if a.degree > 0 else TernaryForm.zero(0, a.precision)
          for a in basis]
    n = pencil.size
    worst = 0
    for p in points:
        M = pencil(p)
        av = [a(p) for a in basis]
        dav = [b(p) for b in da]
        for i in range(n):
            val = sum(pencil.A[i][j] * av[j] + M[i][j] * dav[j] for j in range(n))
            if i == 0:
                val -= df(p)
            worst = max(worst, abs(val))
    return worst


def wronskian_mod_f_residual(f: TernaryForm, g: TernaryForm, sf: SosFactor, basis,
                             points: Sequence[Sequence]):
    """Max of ``|a^T A a - W(f, g)|`` over ``points``, which should lie on V(f)."""
    W = wronskian(f, g, E1)
    n = len(sf.A)
    worst = 0
    for p in points:
        av = [a(p) for a in basis]
        q = sum(av[i] * sf.A[i][j] * av[j] for i in range(n) for j in range(n))
        worst = max(worst, abs(q - W(p)))
    return worst
