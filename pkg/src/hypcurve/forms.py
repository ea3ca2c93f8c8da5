"""Homogeneous ternary forms and univariate polynomials.

Two scalar modes are supported throughout the package:

* exact   -- coefficients are :class:`fractions.Fraction`, ``precision is None``
* float   -- coefficients are :class:`mpmath.mpf`, ``precision`` is the working
  precision in bits

Values are immutable.  Binary operations require both operands in the same
mode; convert explicitly with :meth:`TernaryForm.to_float` /
:meth:`TernaryForm.to_exact`.  Float operations run at the larger of the two
operand precisions.
"""
from __future__ import annotations

import ast
import math
import os
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath

from .errors import InputError

Exponent = tuple[int, int, int]

DEFAULT_PRECISION = int(os.environ.get("HYPCURVE_PRECISION", "256"))
VARIABLES = ("x", "y", "z")


class ScalarModeError(InputError, TypeError):
    """Raised when exact and float values are mixed without conversion."""


# ---------------------------------------------------------------- scalars


def is_exact_scalar(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def to_fraction(c) -> Fraction:
    """Exact value of an int, Fraction, decimal string, float or mpf."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    if isinstance(c, mpmath.mpf):
        sign, man, exp, _ = c._mpf_
        if not man:
            return Fraction(0)
        v = Fraction(int(man)) * (Fraction(2) ** exp)
        return -v if sign else v
    raise TypeError(f"cannot convert {type(c).__name__} to Fraction")


def to_mpf(c):
    """Convert to mpf (or mpc for complex input) at the current precision."""
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    if isinstance(c, (mpmath.mpf, mpmath.mpc)):
        return +c
    if isinstance(c, complex):
        return mpmath.mpc(c)
    return mpmath.mpf(c)


def _join_precision(p: int | None, q: int | None) -> int | None:
    if (p is None) != (q is None):
        raise ScalarModeError("mixing exact and float values; convert explicitly")
    return None if p is None else max(p, q)


# ---------------------------------------------------------------- monomials


def monomials(d: int) -> list[Exponent]:
    """Exponents of degree ``d`` in graded-lex order (x^d first, z^d last)."""
    return [(i, j, d - i - j) for i in range(d, -1, -1) for j in range(d - i, -1, -1)]


def num_monomials(d: int) -> int:
    return (d + 1) * (d + 2) // 2


# ---------------------------------------------------------------- univariate


class UnivariatePoly:
    """Dense univariate polynomial, coefficients in ascending degree."""

    __slots__ = ("coeffs", "precision")

    def __init__(self, coeffs: Iterable, precision: int | None = None):
        if precision is None:
            cs = [to_fraction(c) for c in coeffs]
        else:
            with mpmath.workprec(precision):
                cs = [to_mpf(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self.precision = precision

    @property
    def exact(self) -> bool:
        return self.precision is None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else 0

    def _like(self, coeffs, precision="same") -> UnivariatePoly:
        return UnivariatePoly(coeffs, self.precision if precision == "same" else precision)

    def __repr__(self):
        return f"UnivariatePoly({[str(c) for c in self.coeffs]}, precision={self.precision})"

    def __eq__(self, other):
        if not isinstance(other, UnivariatePoly):
            return NotImplemented
        return self.precision == other.precision and self.coeffs == other.coeffs

    def __call__(self, t):
        acc = 0
        if self.exact and is_exact_scalar(t):
            for c in reversed(self.coeffs):
                acc = acc * t + c
            return acc
        with mpmath.workprec(self.precision or DEFAULT_PRECISION):
            t = to_mpf(t)
            for c in reversed(self.coeffs):
                acc = acc * t + to_mpf(c)
            return acc

    def _check(self, other) -> int | None:
        return _join_precision(self.precision, other.precision)

    def __add__(self, other):
        if not isinstance(other, UnivariatePoly):
            other = self._like([other])
        p = self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        with mpmath.workprec(p or 53):
            return UnivariatePoly([x + y for x, y in zip(a, b)], p)

    __radd__ = __add__

    def __neg__(self):
        with mpmath.workprec(self.precision or 53):
            return self._like([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, UnivariatePoly) else self._like([other]) * -1)

    def __mul__(self, other):
        if not isinstance(other, UnivariatePoly):
            with mpmath.workprec(self.precision or 53):
                if self.exact:
                    other = to_fraction(other)
                return self._like([c * other for c in self.coeffs])
        p = self._check(other)
        if self.is_zero() or other.is_zero():
            return UnivariatePoly([], p)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        with mpmath.workprec(p or 53):
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return UnivariatePoly(out, p)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self._like([1])
        for _ in range(n):
            out = out * self
        return out

    def divmod(self, other: UnivariatePoly) -> tuple[UnivariatePoly, UnivariatePoly]:
        p = self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        with mpmath.workprec(p or 53):
            rem = list(self.coeffs)
            dq = len(rem) - len(other.coeffs)
            if dq < 0:
                return UnivariatePoly([], p), self
            quot = [0] * (dq + 1)
            lc = other.coeffs[-1]
            for k in range(dq, -1, -1):
                c = rem[k + len(other.coeffs) - 1] / lc
                quot[k] = c
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
            rem = rem[: len(other.coeffs) - 1]
            return UnivariatePoly(quot, p), UnivariatePoly(rem, p)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def derivative(self) -> UnivariatePoly:
        with mpmath.workprec(self.precision or 53):
            return self._like([i * c for i, c in enumerate(self.coeffs)][1:])

    def monic(self) -> UnivariatePoly:
        if self.is_zero():
            return self
        lc = self.leading
        with mpmath.workprec(self.precision or 53):
            return self._like([c / lc for c in self.coeffs])

    def gcd(self, other: UnivariatePoly) -> UnivariatePoly:
        """Monic gcd; exact mode only."""
        if not (self.exact and other.exact):
            raise ScalarModeError("gcd is only defined in exact mode")
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def squarefree_decomposition(self) -> list[tuple[UnivariatePoly, int]]:
        """Yun's algorithm: list of (squarefree factor, multiplicity), exact mode."""
        if self.degree < 1:
            return []
        f = self.monic()
        df = f.derivative()
        a = f.gcd(df)
        b = f // a
        c = df // a
        out = []
        i = 1
        while b.degree > 0:
            d = c - b.derivative()
            g = b.gcd(d)
            if g.degree > 0:
                out.append((g, i))
            b = b // g
            c = d // g
            i += 1
        return out

    def to_float(self, precision: int = DEFAULT_PRECISION) -> UnivariatePoly:
        return UnivariatePoly(self.coeffs, precision)

    def to_exact(self) -> UnivariatePoly:
        return UnivariatePoly(self.coeffs, None)


# ---------------------------------------------------------------- directions


class Direction(tuple):
    """A point of P^2(R), scaled so that its first nonzero coordinate is positive."""

    def __new__(cls, coords: Sequence, precision: int | None = None):
        if len(coords) != 3:
            raise ValueError("a direction needs three coordinates")
        if precision is None and all(is_exact_scalar(c) or isinstance(c, str) for c in coords):
            cs = [to_fraction(c) for c in coords]
        else:
            precision = precision or DEFAULT_PRECISION
            with mpmath.workprec(precision):
                cs = [to_mpf(c) for c in coords]
        if all(c == 0 for c in cs):
            raise ValueError("direction must be nonzero")
        first = next(c for c in cs if c != 0)
        if first < 0:
            cs = [-c for c in cs]
        obj = super().__new__(cls, cs)
        obj.precision = precision
        return obj

    @property
    def exact(self) -> bool:
        return self.precision is None

    def to_float(self, precision: int = DEFAULT_PRECISION) -> Direction:
        return Direction(list(self), precision)


# ---------------------------------------------------------------- forms


class TernaryForm:
    """Homogeneous polynomial in x, y, z stored as {exponent: coefficient}."""

    __slots__ = ("degree", "coeffs", "precision")

    def __init__(self, degree: int, coeffs: Mapping[Exponent, object] | None = None,
                 precision: int | None = None):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        cs: dict[Exponent, object] = {}
        if precision is None:
            conv = to_fraction
            ctx = mpmath.workprec(53)
        else:
            conv = to_mpf
            ctx = mpmath.workprec(precision)
        with ctx:
            for e, c in (coeffs or {}).items():
                e = tuple(int(k) for k in e)
                if len(e) != 3 or min(e) < 0 or sum(e) != degree:
                    raise ValueError(f"exponent {e} does not have degree {degree}")
                c = conv(c)
                if c != 0:
                    cs[e] = cs.get(e, 0) + c
        self.degree = degree
        self.coeffs = {e: c for e, c in cs.items() if c != 0}
        self.precision = precision

    # construction helpers
    @classmethod
    def zero(cls, degree: int, precision: int | None = None) -> TernaryForm:
        return cls(degree, {}, precision)

    @classmethod
    def constant(cls, c, precision: int | None = None) -> TernaryForm:
        return cls(0, {(0, 0, 0): c}, precision)

    @classmethod
    def linear(cls, a, b, c, precision: int | None = None) -> TernaryForm:
        return cls(1, {(1, 0, 0): a, (0, 1, 0): b, (0, 0, 1): c}, precision)

    @classmethod
    def variable(cls, i: int, precision: int | None = None) -> TernaryForm:
        e = [0, 0, 0]
        e[i] = 1
        return cls(1, {tuple(e): 1}, precision)

    @classmethod
    def from_vector(cls, degree: int, vec: Sequence, precision: int | None = None) -> TernaryForm:
        mons = monomials(degree)
        if len(vec) != len(mons):
            raise ValueError("coefficient vector has the wrong length")
        return cls(degree, dict(zip(mons, vec)), precision)

    @classmethod
    def parse(cls, text: str, precision: int | None = None) -> TernaryForm:
        return parse_form(text, precision)

    # basic properties
    @property
    def exact(self) -> bool:
        return self.precision is None

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, e: Exponent):
        return self.coeffs.get(tuple(e), 0)

    def vector(self) -> list:
        return [self.coeffs.get(e, 0) for e in monomials(self.degree)]

    def __repr__(self):
        return f"TernaryForm({format_form(self)!r}, precision={self.precision})"

    def __str__(self):
        return format_form(self)

    def __eq__(self, other):
        if not isinstance(other, TernaryForm):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.precision == other.precision
        return (self.degree == other.degree and self.precision == other.precision
                and self.coeffs == other.coeffs)

    __hash__ = None

    def _prec_ctx(self, other: TernaryForm | None = None):
        p = self.precision if other is None else _join_precision(self.precision, other.precision)
        return p, mpmath.workprec(p or 53)

    # conversions
    def to_float(self, precision: int = DEFAULT_PRECISION) -> TernaryForm:
        return TernaryForm(self.degree, self.coeffs, precision)

    def to_exact(self) -> TernaryForm:
        return TernaryForm(self.degree, self.coeffs, None)

    def max_abs(self):
        with mpmath.workprec(self.precision or 53):
            return max((abs(c) for c in self.coeffs.values()), default=0)

    def normalized(self) -> TernaryForm:
        """Scaled to unit max-absolute coefficient (zero stays zero)."""
        m = self.max_abs()
        if m == 0:
            return self
        return self * (1 / m if not self.exact else Fraction(1) / m)

    def norm(self):
        with mpmath.workprec(self.precision or DEFAULT_PRECISION):
            return mpmath.sqrt(mpmath.fsum(to_mpf(c) ** 2 for c in self.coeffs.values()))

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, TernaryForm):
            if other == 0:
                return self
            other = TernaryForm(0, {(0, 0, 0): other}, self.precision)
        p, ctx = self._prec_ctx(other)
        if self.is_zero():
            return TernaryForm(other.degree, other.coeffs, p)
        if other.is_zero():
            return TernaryForm(self.degree, self.coeffs, p)
        if self.degree != other.degree:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")
        with ctx:
            out = dict(self.coeffs)
            for e, c in other.coeffs.items():
                out[e] = out.get(e, 0) + c
            return TernaryForm(self.degree, out, p)

    __radd__ = __add__

    def __neg__(self):
        with mpmath.workprec(self.precision or 53):
            return TernaryForm(self.degree, {e: -c for e, c in self.coeffs.items()},
                               self.precision)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TernaryForm):
            p, ctx = self._prec_ctx()
            with ctx:
                if p is None:
                    if not is_exact_scalar(other):
                        raise ScalarModeError("exact form times inexact scalar")
                    other = Fraction(other)
                else:
                    other = to_mpf(other)
                return TernaryForm(self.degree, {e: c * other for e, c in self.coeffs.items()}, p)
        p, ctx = self._prec_ctx(other)
        with ctx:
            out: dict[Exponent, object] = {}
            for (a1, a2, a3), c in self.coeffs.items():
                for (b1, b2, b3), d in other.coeffs.items():
                    e = (a1 + b1, a2 + b2, a3 + b3)
                    out[e] = out.get(e, 0) + c * d
            return TernaryForm(self.degree + other.degree, out, p)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, TernaryForm):
            raise TypeError("use divide() for form division")
        if self.exact:
            return self * (Fraction(1) / to_fraction(scalar))
        with mpmath.workprec(self.precision):
            return self * (1 / to_mpf(scalar))

    def __pow__(self, n: int):
        out = TernaryForm.constant(1, self.precision)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # evaluation
    def __call__(self, point: Sequence):
        x, y, z = point
        if self.exact and all(is_exact_scalar(c) for c in point):
            return sum((c * x ** i * y ** j * z ** k for (i, j, k), c in self.coeffs.items()),
                       Fraction(0))
        with mpmath.workprec(self.precision or DEFAULT_PRECISION):
            x, y, z = (to_mpf(c) for c in point)
            return mpmath.fsum(to_mpf(c) * x ** i * y ** j * z ** k
                               for (i, j, k), c in self.coeffs.items())

    def partial(self, var: int) -> TernaryForm:
        if self.degree == 0:
            return TernaryForm.zero(0, self.precision)
        p, ctx = self._prec_ctx()
        with ctx:
            out = {}
            for e, c in self.coeffs.items():
                if e[var]:
                    ne = list(e)
                    ne[var] -= 1
                    out[tuple(ne)] = c * e[var]
            return TernaryForm(self.degree - 1, out, p)

    def gradient(self) -> tuple[TernaryForm, TernaryForm, TernaryForm]:
        return self.partial(0), self.partial(1), self.partial(2)

    def transform(self, T: Sequence[Sequence]) -> TernaryForm:
        """The form X -> f(T X), T a 3x3 matrix given by rows."""
        lin = [TernaryForm.linear(*row, precision=self.precision) for row in T]
        out = TernaryForm.zero(self.degree, self.precision)
        powers = [[TernaryForm.constant(1, self.precision)] for _ in range(3)]
        for v in range(3):
            for _ in range(self.degree):
                powers[v].append(powers[v][-1] * lin[v])
        for (i, j, k), c in self.coeffs.items():
            out = out + powers[0][i] * powers[1][j] * powers[2][k] * c
        if out.is_zero():
            return TernaryForm.zero(self.degree, self.precision)
        return out


# ---------------------------------------------------------------- operations


def _check_mode(*values):
    modes = set()
    for v in values:
        if isinstance(v, (TernaryForm, UnivariatePoly, Direction)):
            modes.add(v.precision is None)
        elif isinstance(v, (list, tuple)):
            for c in v:
                if isinstance(c, (mpmath.mpf, float)):
                    modes.add(False)
                elif isinstance(c, Fraction):
                    modes.add(True)
    if len(modes) > 1:
        raise ScalarModeError("mixed scalar modes; convert explicitly")


def restrict(f: TernaryForm, e: Sequence, v: Sequence) -> UnivariatePoly:
    """The univariate polynomial t -> f(t*e + v)."""
    _check_mode(f, e, v)
    p = f.precision
    lines = [UnivariatePoly([v[i], e[i]], p) for i in range(3)]
    pw = []
    for i in range(3):
        row = [UnivariatePoly([1], p)]
        for _ in range(f.degree):
            row.append(row[-1] * lines[i])
        pw.append(row)
    out = UnivariatePoly([], p)
    for (i, j, k), c in f.coeffs.items():
        out = out + pw[0][i] * pw[1][j] * pw[2][k] * c
    return out


def dir_derivative(f: TernaryForm, e: Sequence) -> TernaryForm:
    """D_e f = sum_i e_i * df/dx_i."""
    if f.degree < 1:
        raise InputError("directional derivative needs degree >= 1")
    _check_mode(f, e)
    out = TernaryForm.zero(f.degree - 1, f.precision)
    for i in range(3):
        if e[i] != 0:
            out = out + f.partial(i) * e[i]
    return out


def _exact_divide(f: TernaryForm, g: TernaryForm) -> tuple[TernaryForm, TernaryForm]:
    """Multivariate division with lex order; returns (quotient, remainder)."""
    rem = dict(f.coeffs)
    lead = max(g.coeffs)
    lc = g.coeffs[lead]
    quot: dict[Exponent, Fraction] = {}
    out_rem: dict[Exponent, Fraction] = {}
    while rem:
        m = max(rem)
        c = rem[m]
        if all(m[i] >= lead[i] for i in range(3)):
            qe = tuple(m[i] - lead[i] for i in range(3))
            qc = c / lc
            quot[qe] = quot.get(qe, 0) + qc
            for e, gc in g.coeffs.items():
                t = (qe[0] + e[0], qe[1] + e[1], qe[2] + e[2])
                v = rem.get(t, 0) - qc * gc
                if v == 0:
                    rem.pop(t, None)
                else:
                    rem[t] = v
        else:
            out_rem[m] = c
            del rem[m]
    return TernaryForm(f.degree - g.degree, quot), TernaryForm(f.degree, out_rem)


def multiplication_matrix(g: TernaryForm, qdeg: int) -> list[list]:
    """Matrix of q -> q*g from degree-qdeg coefficients to degree-(qdeg+deg g) ones."""
    rows = monomials(qdeg + g.degree)
    idx = {e: i for i, e in enumerate(rows)}
    cols = monomials(qdeg)
    mat = [[0] * len(cols) for _ in rows]
    for j, qe in enumerate(cols):
        for ge, c in g.coeffs.items():
            mat[idx[(qe[0] + ge[0], qe[1] + ge[1], qe[2] + ge[2])]][j] = c
    return mat


def divide(f: TernaryForm, g: TernaryForm, tol=None):
    """Divide ``f`` by ``g``.

    Returns ``(quotient, residual)`` where the residual is
    ``|f - q g| / |f|`` with both forms scaled to unit max-coefficient.  In
    exact mode an exact quotient gives residual ``Fraction(0)``.
    """
    _check_mode(f, g)
    if g.is_zero():
        raise InputError("division by the zero form")
    if f.is_zero():
        return TernaryForm.zero(max(f.degree - g.degree, 0), f.precision), 0
    if f.degree < g.degree:
        raise InputError("deg f < deg g")
    qdeg = f.degree - g.degree
    if f.exact:
        q, r = _exact_divide(f, g)
        if r.is_zero():
            return q, Fraction(0)
        fq, res = divide(f.to_float(), g.to_float())
        return fq, res
    return Divider(g, qdeg, max(f.precision, g.precision)).divide(f)


class Divider:
    """Repeated float division by a fixed form into a fixed quotient degree.

    Factorizes the multiplication matrix once; :meth:`divide` then costs one
    triangular solve per dividend.
    """

    def __init__(self, g: TernaryForm, qdeg: int, precision: int | None = None):
        from .linalg import LeastSquares

        self.precision = precision or g.precision or DEFAULT_PRECISION
        with mpmath.workprec(self.precision):
            self.g = (g.to_float(self.precision) if g.exact else g).normalized()
            self.qdeg = qdeg
            self._ls = LeastSquares(mpmath.matrix(multiplication_matrix(self.g, qdeg)))
            self._gmax = g.max_abs()

    def divide(self, f: TernaryForm):
        """``(quotient, residual)`` as in :func:`divide`."""
        if f.degree != self.qdeg + self.g.degree:
            raise ValueError("dividend has the wrong degree")
        with mpmath.workprec(self.precision):
            f = f.to_float(self.precision) if f.exact else f
            if f.is_zero():
                return TernaryForm.zero(self.qdeg, self.precision), mpmath.mpf(0)
            fn = f.normalized()
            x = self._ls.solve(fn.vector())
            q = TernaryForm.from_vector(self.qdeg, list(x), self.precision)
            resid = (fn - q * self.g).norm() / fn.norm()
            return q * (f.max_abs() / to_mpf(self._gmax)), resid


def fit_form(degree: int, points: Sequence[Sequence], values: Sequence,
             precision: int | None = None):
    """Form of the given degree matching ``values`` at ``points``.

    Exact mode (``precision=None``) solves the square interpolation system
    over Q and needs exactly ``num_monomials(degree)`` points in general
    position.  Float mode fits by least squares and also returns the relative
    residual.
    """
    from .linalg import LeastSquares, exact_rank, exact_solve

    mons = monomials(degree)
    if precision is None:
        rows = [[Fraction(p[0]) ** i * Fraction(p[1]) ** j * Fraction(p[2]) ** k
                 for i, j, k in mons] for p in points]
        sol = exact_solve(rows, [Fraction(v) for v in values])
        if sol is None or exact_rank(rows) < len(mons):
            raise ValueError("interpolation points are not in general position")
        return TernaryForm.from_vector(degree, sol), Fraction(0)
    with mpmath.workprec(precision):
        pts = [[to_mpf(c) for c in p] for p in points]
        A = mpmath.matrix([[p[0] ** i * p[1] ** j * p[2] ** k for i, j, k in mons] for p in pts])
        ls = LeastSquares(A)
        b = mpmath.matrix([to_mpf(v) for v in values])
        x = ls.solve(b)
        return TernaryForm.from_vector(degree, list(x), precision), ls.residual(x, b)


def divides(f: TernaryForm, g: TernaryForm, tol=1e-10) -> bool:
    """True if g divides f within the normalized residual tolerance."""
    return divide(f, g)[1] <= tol


# ---------------------------------------------------------------- text and JSON


def format_form(f: TernaryForm) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for e in monomials(f.degree):
        c = f.coeffs.get(e)
        if c is None:
            continue
        mono = "*".join(
            (v if k == 1 else f"{v}^{k}") for v, k in zip(VARIABLES, e) if k
        )
        if f.exact:
            cs = str(c)
        else:
            cs = mpmath.nstr(c, 17)
        neg = cs.startswith("-")
        mag = cs[1:] if neg else cs
        if mono:
            if mag == "1":
                term = mono
            elif "/" in mag:
                term = f"({mag})*{mono}"
            else:
                term = f"{mag}*{mono}"
        else:
            term = mag
        parts.append(("- " if neg else "+ ") + term)
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


class FormParseError(InputError):
    pass


def parse_form(text: str, precision: int | None = None) -> TernaryForm:
    """Parse an expression such as ``"x^3 + 2*x^2*y - (1/5)*x*z^2"``."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise FormParseError(f"cannot parse {text!r}: {exc.msg}") from None

    # Evaluate to a dict {exponent: Fraction}; nonhomogeneous input is rejected later.
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return {(0, 0, 0): Fraction(str(node.value))}
        if isinstance(node, ast.Name):
            if node.id not in VARIABLES:
                raise FormParseError(f"unknown variable {node.id!r}")
            e = [0, 0, 0]
            e[VARIABLES.index(node.id)] = 1
            return {tuple(e): Fraction(1)}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return {k: -c for k, c in v.items()} if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = ev(node.left)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)
                        and node.right.value >= 0):
                    raise FormParseError("exponents must be nonnegative integer literals")
                out = {(0, 0, 0): Fraction(1)}
                for _ in range(node.right.value):
                    out = _pmul(out, a)
                return out
            b = ev(node.right)
            if isinstance(node.op, ast.Add):
                return _padd(a, b, 1)
            if isinstance(node.op, ast.Sub):
                return _padd(a, b, -1)
            if isinstance(node.op, ast.Mult):
                return _pmul(a, b)
            if isinstance(node.op, ast.Div):
                if set(b) - {(0, 0, 0)}:
                    raise FormParseError("division by a non-constant")
                c = b.get((0, 0, 0), 0)
                if c == 0:
                    raise FormParseError("division by zero")
                return {k: v / c for k, v in a.items()}
        raise FormParseError(f"unsupported syntax in {text!r}")

    poly = {k: c for k, c in ev(tree).items() if c != 0}
    degs = {sum(k) for k in poly}
    if len(degs) > 1:
        raise FormParseError(f"{text!r} is not homogeneous")
    deg = degs.pop() if degs else 0
    return TernaryForm(deg, poly, precision)


def _padd(a, b, sign):
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, 0) + sign * c
    return out


def _pmul(a, b):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = (ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2])
            out[k] = out.get(k, 0) + ca * cb
    return out


def form_to_json(f: TernaryForm) -> dict:
    terms = []
    for e in monomials(f.degree):
        c = f.coeffs.get(e)
        if c is None:
            continue
        if f.exact:
            terms.append({"e": list(e), "num": str(c.numerator), "den": str(c.denominator)})
        else:
            digits = int(f.precision * math.log10(2)) + 2
            terms.append({"e": list(e), "val": mpmath.nstr(c, digits, strip_zeros=False)})
    out: dict = {"degree": f.degree, "terms": terms}
    if not f.exact:
        out["precision"] = f.precision
    return out


def form_from_json(data) -> TernaryForm:
    if isinstance(data, str):
        return parse_form(data)
    if "terms" not in data:
        raise FormParseError("form JSON needs a 'terms' list")
    prec = data.get("precision")
    terms = data["terms"]
    if prec is None:
        coeffs = {tuple(t["e"]): Fraction(int(t["num"]), int(t.get("den", 1))) for t in terms}
        ctx = mpmath.workprec(53)
    else:
        ctx = mpmath.workprec(int(prec))
        with ctx:
            coeffs = {tuple(t["e"]): mpmath.mpf(t["val"]) for t in terms}
    if "degree" in data:
        deg = int(data["degree"])
    elif terms:
        deg = sum(terms[0]["e"])
    else:
        deg = 0
    return TernaryForm(deg, coeffs, None if prec is None else int(prec))
