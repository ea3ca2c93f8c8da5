"""Hyperbolicity, interlacers, multivariate Bezout matrices and Wronskians."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .forms import (
    DEFAULT_PRECISION,
    TernaryForm,
    UnivariatePoly,
    dir_derivative,
    restrict,
    to_fraction,
    to_mpf,
)
from .errors import InputError
from .linalg import exact_inertia
from .univariate import (
    bezout_coefficients,
    count_real_roots,
    count_roots_above,
    interlaces,
    isolate_real_roots,
)


class HyperbolicityError(InputError):
    pass


def extremal_contact_bound(d: int) -> int:
    """Lower bound ceil(((d+1)d - 2)/4) on real contacts of an extremal interlacer."""
    if d < 2:
        raise InputError("d must be at least 2")
    return -(-((d + 1) * d - 2) // 4)


# ---------------------------------------------------------------- frames and sampling


def frame_for(e: Sequence) -> list[list]:
    """A matrix T (rows) with T (1,0,0)^t = e, completed by coordinate vectors."""
    k = max(range(3), key=lambda i: abs(e[i]))
    others = [i for i in range(3) if i != k]
    cols = [list(e)] + [[int(i == j) for i in range(3)] for j in others]
    return [[cols[c][r] for c in range(3)] for r in range(3)]


def rotate(f: TernaryForm, e: Sequence) -> TernaryForm:
    """f(T X) with T = frame_for(e), so that e becomes (1, 0, 0)."""
    if list(e) == [1, 0, 0]:
        return f
    return f.transform(frame_for(e))


def random_directions(n: int, seed: int, exact: bool) -> list[list]:
    """Seeded directions, uniform on the sphere (rationalized in exact mode)."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        v = [rng.gauss(0, 1) for _ in range(3)]
        nv = math.sqrt(sum(c * c for c in v))
        if nv < 1e-9:
            continue
        v = [c / nv for c in v]
        out.append([Fraction(c).limit_denominator(1000) for c in v] if exact else v)
    return out


def random_circle_points(n: int, seed: int, exact: bool) -> list[tuple]:
    """Points (y, z) on the unit circle; rational via the Pythagorean parametrization."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        if exact:
            t = Fraction(rng.uniform(-1, 1)).limit_denominator(10 ** 4)
            if rng.random() < 0.5:
                out.append(((1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)))
            else:
                out.append((-(1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)))
        else:
            th = rng.uniform(0, 2 * math.pi)
            out.append((math.cos(th), math.sin(th)))
    return out


def _vec(v, exact: bool, precision: int | None):
    if exact:
        return [to_fraction(c) for c in v]
    with mpmath.workprec(precision or DEFAULT_PRECISION):
        return [to_mpf(c) for c in v]


# ---------------------------------------------------------------- Bezout / Wronskian


@dataclass
class BezoutMatrixM:
    """Bezout matrix with entries in R[y, z] (after moving e to (1, 0, 0))."""

    entries: list[list[TernaryForm]]
    precision: int | None
    frame: list[list] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.entries)

    def evaluate(self, y, z) -> list[list]:
        return [[b((0, y, z)) for b in row] for row in self.entries]

    def quadratic(self, w: Sequence) -> TernaryForm:
        out = TernaryForm.zero(0, self.precision)
        for i, wi in enumerate(w):
            for j, wj in enumerate(w):
                out = out + wi * self.entries[i][j] * wj
        return out

    def is_psd_at(self, y, z, strict: bool = False, tol=None) -> bool:
        vals = self.evaluate(y, z)
        if self.precision is None and all(isinstance(c, Fraction) for r in vals for c in r):
            pos, neg, _ = exact_inertia(vals)
            return pos == self.size if strict else neg == 0
        with mpmath.workprec(self.precision or DEFAULT_PRECISION):
            E = mpmath.eigsy(mpmath.matrix([[to_mpf(c) for c in r] for r in vals]), eigvals_only=True)
            ev = [E[i] for i in range(len(E))]
            scale = max([abs(v) for v in ev] + [mpmath.mpf(1)])
            tol = mpmath.mpf("1e-20") if tol is None else mpmath.mpf(tol)
            if strict:
                return min(ev) > tol * scale
            return min(ev) >= -tol * scale


def _coeffs_in_x(f: TernaryForm) -> list[TernaryForm]:
    """f = sum_k F_k(y, z) x^k; returns [F_0, ..., F_d] (forms without x)."""
    buckets: dict[int, dict] = {}
    for (i, j, k), c in f.coeffs.items():
        buckets.setdefault(i, {})[(0, j, k)] = c
    return [TernaryForm(f.degree - i, buckets.get(i, {}), f.precision) for i in range(f.degree + 1)]


def bezout_multi(f: TernaryForm, g: TernaryForm, e: Sequence = (1, 0, 0)) -> BezoutMatrixM:
    """Bezout matrix of f and g in the variable along ``e``.

    Entry (i, j) (1-based) is a form in (y, z) of degree 2d - (i + j),
    where y, z are the coordinates complementary to e.
    """
    if f(e) == 0 or (not g.is_zero() and g(e) == 0):
        raise HyperbolicityError("f and g must not vanish at e")
    fr, gr = rotate(f, e), rotate(g, e)
    d = f.degree
    with mpmath.workprec(f.precision or 53):
        h = bezout_coefficients(_coeffs_in_x(fr), _coeffs_in_x(gr) if not gr.is_zero() else [],
                                d)
    for i in range(d):
        for j in range(d):
            deg = 2 * d - 2 - i - j
            if h[i][j].is_zero():
                h[i][j] = TernaryForm.zero(deg, f.precision)
    frame = [] if list(e) == [1, 0, 0] else frame_for(e)
    return BezoutMatrixM(h, f.precision, frame)


def wronskian(f: TernaryForm, g: TernaryForm, e: Sequence) -> TernaryForm:
    """W(f, g) = D_e f * g - f * D_e g."""
    if g.is_zero():
        return TernaryForm.zero(2 * f.degree - 2, f.precision)
    if g.degree != f.degree - 1:
        raise InputError("wronskian needs deg g = deg f - 1")
    dg = dir_derivative(g, e) if g.degree > 0 else TernaryForm.zero(0, g.precision)
    out = dir_derivative(f, e) * g - f * dg
    return out if not out.is_zero() else TernaryForm.zero(2 * f.degree - 2, f.precision)


def wronskian_from_bezout(B: BezoutMatrixM) -> TernaryForm:
    """w^T B w with w = (1, x, ..., x^{d-1})."""
    x = TernaryForm.variable(0, B.precision)
    w = [TernaryForm.constant(1, B.precision)]
    for _ in range(B.size - 1):
        w.append(w[-1] * x)
    return B.quadratic(w)


# ---------------------------------------------------------------- hyperbolicity


@dataclass
class HyperbolicityResult:
    hyperbolic: bool
    witness: list | None = None
    reason: str = ""

    def __bool__(self):
        return self.hyperbolic


def _real_root_count(p: UnivariatePoly) -> int:
    return count_real_roots(p)


def is_hyperbolic(f: TernaryForm, e: Sequence, n: int = 500, seed: int = 0) -> HyperbolicityResult:
    """Sampled hyperbolicity test with respect to ``e``.

    Checks real-rootedness of f(te + v) along ``n`` seeded directions and
    positive semidefiniteness of B(f, D_e f) at ``n`` seeded points.
    """
    exact = f.exact
    e = _vec(e, exact, f.precision)
    fe = f(e)
    if fe == 0:
        raise HyperbolicityError("f(e) = 0")
    if fe < 0:
        f = -f
    for v in random_directions(n, seed, exact):
        v = _vec(v, exact, f.precision)
        p = restrict(f, e, v)
        if _real_root_count(p) != f.degree:
            return HyperbolicityResult(False, v, "restriction not real-rooted")
    if f.degree >= 2:
        B = bezout_multi(f, dir_derivative(f, e), e)
        for y, z in random_circle_points(n, seed + 1, exact):
            if not B.is_psd_at(y, z):
                return HyperbolicityResult(False, [0, y, z], "Bezout matrix not PSD")
    return HyperbolicityResult(True)


def cone_contains(f: TernaryForm, e: Sequence, a: Sequence, tol=None) -> bool:
    """Whether ``a`` lies in the closed hyperbolicity cone C(f, e)."""
    exact = f.exact and all(isinstance(c, (int, Fraction)) for c in list(e) + list(a))
    if exact:
        p = restrict(f, [to_fraction(c) for c in e], [to_fraction(c) for c in a])
        if p.leading < 0:
            p = -p
        return count_roots_above(p, 0) == 0
    prec = f.precision or DEFAULT_PRECISION
    ff = f if not f.exact else f.to_float(prec)
    with mpmath.workprec(prec):
        ev = [to_mpf(c) for c in e]
        av = [to_mpf(c) for c in a]
        p = restrict(ff, ev, av)
        roots = isolate_real_roots(p)
        scale = max(abs(c) for c in av) / max(abs(c) for c in ev)
        tol = mpmath.mpf("1e-20") if tol is None else mpmath.mpf(tol)
        return all(r.value <= tol * max(scale, 1) for r in roots)


# ---------------------------------------------------------------- interlacers


@dataclass
class InterlacerReport:
    is_interlacer: bool
    strict: bool
    wronskian_min: object
    bezout_psd_failures: list = field(default_factory=list)
    line_failures: list = field(default_factory=list)
    reason: str = ""
    contact: object = None

    def __bool__(self):
        return self.is_interlacer


def points_on_curve(f: TernaryForm, e: Sequence, n: int, seed: int,
                    precision: int = DEFAULT_PRECISION) -> list[list]:
    """Real points of V(f) on ``n`` seeded lines through e (unit normalized)."""
    ff = f.to_float(precision) if f.exact else f
    out = []
    with mpmath.workprec(precision):
        ev = [to_mpf(c) for c in e]
        for v in random_directions(n, seed, False):
            v = [to_mpf(c) for c in v]
            for r in isolate_real_roots(restrict(ff, ev, v)):
                pt = [r.value * a + b for a, b in zip(ev, v)]
                nrm = mpmath.sqrt(mpmath.fsum(c * c for c in pt))
                out.append([c / nrm for c in pt])
    return out


def is_interlacer(f: TernaryForm, g: TernaryForm, e: Sequence, samples: int = 500,
                  seed: int = 0, tol="1e-20") -> InterlacerReport:
    """Sampled interlacing test of g against f with respect to e.

    Combines per-line root interlacing, Bezout positivity and the sign of the
    Wronskian on V(f).  ``strict`` is set when the Bezout matrix is positive
    definite at every sample.
    """
    if g.degree != f.degree - 1:
        raise InputError("an interlacer has degree deg f - 1")
    exact = f.exact and g.exact
    prec = f.precision or g.precision or DEFAULT_PRECISION
    e_v = _vec(e, exact, prec)
    if f(e_v) < 0:
        f = -f
    ge = g(e_v)
    W = wronskian(f, g, e_v)
    Wf = W.to_float(prec) if W.exact else W
    pts = points_on_curve(f, e_v, max(samples // 5, 10), seed + 2, prec)
    with mpmath.workprec(prec):
        wn = Wf.normalized() if not Wf.is_zero() else Wf
        wmin = min((wn(p) for p in pts), default=mpmath.mpf(0))
    if ge <= 0:
        return InterlacerReport(False, False, wmin, reason="g(e) <= 0")
    line_fail = []
    for v in random_directions(samples, seed, exact):
        v = _vec(v, exact, prec)
        if not interlaces(restrict(f, e_v, v), restrict(g, e_v, v)):
            line_fail.append(v)
            if len(line_fail) >= 5:
                break
    B = bezout_multi(f, g, e_v)
    psd_fail = []
    strict = True
    for y, z in random_circle_points(samples, seed + 1, exact):
        if not B.is_psd_at(y, z, tol=tol):
            psd_fail.append((y, z))
            strict = False
            if len(psd_fail) >= 5:
                break
        elif strict and not B.is_psd_at(y, z, strict=True, tol=tol):
            strict = False
    ok = not line_fail and not psd_fail and wmin >= -mpmath.mpf(tol)
    reason = "" if ok else ("lines" if line_fail else "bezout" if psd_fail else "wronskian")
    return InterlacerReport(ok, ok and strict, wmin, psd_fail, line_fail, reason)
