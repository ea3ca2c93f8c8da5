"""Intersection cycles of plane curves and their contact structure."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .forms import (
    DEFAULT_PRECISION,
    TernaryForm,
    UnivariatePoly,
    to_fraction,
    to_mpf,
)
from .errors import InputError, PrecisionExhausted
from .linalg import exact_det, exact_solve
from .univariate import cluster_tolerance, complex_roots


class CommonComponentError(InputError):
    """The two curves share a component (their resultant vanishes)."""


class NotRealContactError(InputError):
    """A real intersection point has odd multiplicity."""


class SingularPointError(InputError):
    pass


def real_tolerance(precision: int):
    """Imaginary parts below this (after canonical scaling) count as zero."""
    return mpmath.mpf(2) ** (-(precision * 32) // 100)


def ambiguous_tolerance(precision: int):
    return mpmath.mpf(2) ** (-(precision * 195) // 1000)


# ---------------------------------------------------------------- points


class ProjPoint:
    """A point of P^2(C), scaled so the largest-modulus coordinate equals 1."""

    __slots__ = ("coords", "exact", "precision")

    def __init__(self, coords: Sequence, exact: bool = False, precision: int = DEFAULT_PRECISION):
        self.precision = precision
        if exact:
            cs = [to_fraction(c) for c in coords]
            k = _pivot([abs(c) for c in cs])
            self.coords = tuple(c / cs[k] for c in cs)
            self.exact = True
            return
        with mpmath.workprec(precision):
            cs = [mpmath.mpc(to_mpf(c)) for c in coords]
            mods = [abs(c) for c in cs]
            if max(mods) == 0:
                raise ValueError("the zero vector is not a projective point")
            k = _pivot(mods)
            self.coords = tuple(c / cs[k] for c in cs)
        self.exact = False

    def __repr__(self):
        if self.exact:
            return "(" + " : ".join(str(c) for c in self.coords) + ")"
        return "(" + " : ".join(mpmath.nstr(c, 12) for c in self.coords) + ")"

    def imag_size(self):
        if self.exact:
            return 0
        return max(abs(mpmath.im(c)) for c in self.coords)

    def is_real(self) -> bool:
        if self.exact:
            return True
        im = self.imag_size()
        if im < real_tolerance(self.precision):
            return True
        if im < ambiguous_tolerance(self.precision):
            raise PrecisionExhausted(f"cannot decide whether {self} is real")
        return False

    def real_coords(self) -> list:
        if self.exact:
            return list(self.coords)
        with mpmath.workprec(self.precision):
            return [mpmath.re(c) for c in self.coords]

    def conjugate(self) -> ProjPoint:
        if self.exact:
            return self
        with mpmath.workprec(self.precision):
            conj = [mpmath.conj(c) for c in self.coords]
        return ProjPoint(conj, precision=self.precision)

    def distance(self, other: ProjPoint):
        with mpmath.workprec(self.precision):
            a = [mpmath.mpc(to_mpf(c)) if self.exact else c for c in self.coords]
            b = [mpmath.mpc(to_mpf(c)) if other.exact else c for c in other.coords]
            return max(abs(u - v) for u, v in zip(a, b))

    def to_json(self) -> list:
        with mpmath.workprec(self.precision):
            out = []
            for c in self.coords:
                c = mpmath.mpc(to_mpf(c))
                out.append([mpmath.nstr(mpmath.re(c), 30), mpmath.nstr(mpmath.im(c), 30)])
            return out


def _pivot(mods) -> int:
    # largest modulus, ties toward the last coordinate
    top = max(mods)
    return max(i for i, m in enumerate(mods) if m >= top * (1 - mpmath.mpf("1e-12")))


# ---------------------------------------------------------------- cycles


@dataclass
class IntersectionCycle:
    points: list[tuple[ProjPoint, int]]
    degrees: tuple[int, int]
    shear: list = field(default_factory=list, repr=False)

    @property
    def total(self) -> int:
        return sum(m for _, m in self.points)

    def to_json(self) -> dict:
        return {
            "points": [{"coords": p.to_json(), "mult": m} for p, m in self.points],
            "degrees": list(self.degrees),
        }

    @classmethod
    def from_json(cls, data, precision: int = DEFAULT_PRECISION) -> IntersectionCycle:
        pts = []
        with mpmath.workprec(precision):
            for item in data["points"]:
                coords = [mpmath.mpc(mpmath.mpf(re), mpmath.mpf(im)) for re, im in item["coords"]]
                pts.append((ProjPoint(coords, precision=precision), int(item["mult"])))
        return cls(pts, tuple(data["degrees"]))

    def match(self, other: IntersectionCycle, tol) -> bool:
        """Point-by-point agreement (with multiplicities) within ``tol``."""
        if sorted(m for _, m in self.points) != sorted(m for _, m in other.points):
            return False
        unused = list(other.points)
        for p, m in self.points:
            hit = next((i for i, (q, n) in enumerate(unused) if n == m and p.distance(q) <= tol), None)
            if hit is None:
                return False
            unused.pop(hit)
        return True


def _random_shear(rng: random.Random) -> list[list[Fraction]]:
    while True:
        T = [[Fraction(int(i == j)) + Fraction(rng.randint(-9, 9), 11) for j in range(3)]
             for i in range(3)]
        if exact_det(T) != 0:
            return T


def _z_coefficients(F: TernaryForm, x0, exact: bool) -> list:
    """Coefficients (ascending in z) of F(x0, 1, z)."""
    out = [0] * (F.degree + 1)
    for (i, j, k), c in F.coeffs.items():
        out[k] = out[k] + c * x0 ** i
    return out


def _sylvester_det(a: list, b: list, exact: bool):
    """Resultant of two univariate polynomials given ascending coefficients."""
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    ad, bd = list(reversed(a)), list(reversed(b))
    rows = []
    for i in range(n):
        rows.append([0] * i + ad + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + bd + [0] * (size - n - 1 - i))
    if exact:
        return exact_det(rows)
    return mpmath.det(mpmath.matrix(rows))


def resultant_z(F: TernaryForm, G: TernaryForm) -> UnivariatePoly:
    """Res_z(F(x,1,z), G(x,1,z)) as an exact polynomial in x (exact input only)."""
    D = F.degree * G.degree
    xs = [Fraction(k) for k in range(D + 1)]
    vals = [_sylvester_det(_z_coefficients(F, x, True), _z_coefficients(G, x, True), True)
            for x in xs]
    V = [[x ** k for k in range(D + 1)] for x in xs]
    return UnivariatePoly(exact_solve(V, vals))


def intersection_cycle(f: TernaryForm, g: TernaryForm, seed: int = 0,
                       precision: int = DEFAULT_PRECISION, max_tries: int = 5) -> IntersectionCycle:
    """All points of V(f) and V(g) in P^2(C) with intersection multiplicities.

    Multiplicities are the root multiplicities of the resultant with respect
    to z after a random rational projective change of coordinates, retried on
    detected degeneracy.  Float input is converted to its exact dyadic value;
    its resultant roots are clustered at the float tolerance.
    """
    exact_input = f.exact and g.exact
    fe, ge = f.to_exact(), g.to_exact()
    d, dp = f.degree, g.degree
    rng = random.Random(seed)
    last_error: Exception | None = None
    for _ in range(max_tries):
        T = _random_shear(rng)
        F, G = fe.transform(T), ge.transform(T)
        if F.coefficient((0, 0, d)) == 0 or G.coefficient((0, 0, dp)) == 0:
            continue
        R = resultant_z(F, G)
        if R.is_zero():
            raise CommonComponentError("the forms have a common component")
        if R.degree != d * dp:
            continue  # an intersection point on y = 0 after shearing
        try:
            pts = _points_from_resultant(F, G, R, T, exact_input, precision)
        except _Degenerate as exc:
            last_error = exc
            continue
        return IntersectionCycle(pts, (d, dp), T)
    raise PrecisionExhausted(f"no generic projection found ({last_error})")


class _Degenerate(Exception):
    pass


def _points_from_resultant(F, G, R, T, exact_input, precision):
    with mpmath.workprec(precision):
        roots: list[tuple] = []  # (x0, multiplicity)
        for fac, mult in R.squarefree_decomposition():
            for x0 in complex_roots(fac, precision):
                roots.append((mpmath.mpc(x0), mult))
        if not exact_input:
            roots = _cluster_complex(roots, precision)
        Fm = F.to_float(precision)
        Gm = G.to_float(precision)
        tiny = mpmath.mpf(2) ** (-precision // 3)
        big = mpmath.mpf(2) ** (-precision // 8)
        Tm = [[to_mpf(c) for c in row] for row in T]
        out = []
        for x0, mult in roots:
            zc = _z_coefficients(Gm, x0, False)
            zs = _complex_poly_roots(zc)
            fvals = []
            fz = _z_coefficients(Fm, x0, False)
            fscale = mpmath.fsum(abs(c) for c in fz) or 1
            for z in zs:
                val = abs(mpmath.polyval(list(reversed(fz)), z)) / (fscale * max(1, abs(z)) ** F.degree)
                fvals.append(val)
            order = sorted(range(len(zs)), key=lambda i: fvals[i])
            if fvals[order[0]] > tiny:
                raise _Degenerate("no common root above a resultant root")
            if len(order) > 1 and fvals[order[1]] < big:
                raise _Degenerate("two intersection points on one projection line")
            z0 = zs[order[0]]
            X = [x0, mpmath.mpf(1), z0]
            P = [mpmath.fsum(Tm[i][j] * X[j] for j in range(3)) for i in range(3)]
            out.append((ProjPoint(P, precision=precision), mult))
        return out


def _complex_poly_roots(asc: list) -> list:
    desc = list(reversed(asc))
    while desc and desc[0] == 0:
        desc.pop(0)
    if len(desc) <= 1:
        return []
    if len(desc) == 2:
        return [-desc[1] / desc[0]]
    return list(mpmath.polyroots(desc, maxsteps=400, extraprec=2 * mpmath.mp.prec))


def _cluster_complex(roots, precision):
    tol = cluster_tolerance(precision) * max([1] + [abs(r) for r, _ in roots])
    out: list[list] = []
    for r, m in roots:
        for c in out:
            if abs(c[0] - r) <= tol:
                c[1] += m
                break
        else:
            out.append([r, m])
    return [(r, m) for r, m in out]


# ---------------------------------------------------------------- classification


@dataclass
class ContactData:
    contacts: list[tuple[ProjPoint, int]]
    pairs: list[tuple[ProjPoint, ProjPoint]]
    lines: list[TernaryForm]
    e: tuple = ()

    @property
    def r(self) -> int:
        return sum(mu for _, mu in self.contacts)

    @property
    def s(self) -> int:
        return len(self.pairs)


def line_through(p: ProjPoint, q: ProjPoint, precision: int) -> list:
    """Coefficients of a line through two (possibly conjugate) points."""
    with mpmath.workprec(precision):
        a = [mpmath.mpc(to_mpf(c)) for c in p.coords]
        b = [mpmath.mpc(to_mpf(c)) for c in q.coords]
        return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def cross(a: Sequence, b: Sequence) -> list:
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def classify_cycle(cycle: IntersectionCycle, e: Sequence, precision: int = DEFAULT_PRECISION) -> ContactData:
    """Split a cycle into real contacts and conjugate pairs with their real lines."""
    contacts = []
    nonreal: list[tuple[ProjPoint, int]] = []
    for p, m in cycle.points:
        if p.is_real():
            if m % 2:
                raise NotRealContactError(f"real point {p} has odd multiplicity {m}")
            contacts.append((ProjPoint(p.real_coords(), precision=precision), m // 2))
        else:
            nonreal.append((p, m))
    pairs = []
    lines = []
    used = [False] * len(nonreal)
    with mpmath.workprec(precision):
        for i, (p, m) in enumerate(nonreal):
            if used[i]:
                continue
            pc = p.conjugate()
            j = min((k for k in range(len(nonreal)) if not used[k] and k != i and nonreal[k][1] == m),
                    key=lambda k: nonreal[k][0].distance(pc), default=None)
            if j is None or nonreal[j][0].distance(pc) > ambiguous_tolerance(precision):
                raise InputError("cycle is not closed under complex conjugation")
            used[i] = used[j] = True
            q = p if mpmath.im(_first_nonreal(p)) > 0 else nonreal[j][0]
            re = [mpmath.re(c) for c in q.coords]
            im = [mpmath.im(c) for c in q.coords]
            coeffs = cross(re, im)
            ev = mpmath.fsum(to_mpf(a) * b for a, b in zip(e, coeffs))
            if ev == 0:
                raise InputError("a conjugate-pair line passes through e")
            scale = max(abs(c) for c in coeffs) * (1 if ev > 0 else -1)
            line = TernaryForm.linear(*(c / scale for c in coeffs), precision=precision)
            for _ in range(m):
                pairs.append((q, q.conjugate()))
                lines.append(line)
    order = sorted(range(len(pairs)), key=lambda i: [float(c) for c in lines[i].vector()])
    return ContactData(
        sorted(contacts, key=lambda t: [float(c) for c in t[0].real_coords()]),
        [pairs[i] for i in order],
        [lines[i] for i in order],
        tuple(e),
    )


def _first_nonreal(p: ProjPoint):
    return max(p.coords, key=lambda c: abs(mpmath.im(c)))


def contact_points_by_jacobian(f: TernaryForm, g: TernaryForm, cycle: IntersectionCycle,
                               precision: int = DEFAULT_PRECISION) -> list[ProjPoint]:
    """Cycle points where grad f and grad g are parallel (tangential intersections)."""
    fg = [d.to_float(precision) for d in f.gradient()]
    gg = [d.to_float(precision) for d in g.gradient()]
    out = []
    with mpmath.workprec(precision):
        tol = mpmath.mpf(2) ** (-precision // 4)
        for p, _ in cycle.points:
            a = [d(p.coords) for d in fg]
            b = [d(p.coords) for d in gg]
            na = max(abs(c) for c in a)
            nb = max(abs(c) for c in b)
            if max(abs(c) for c in cross(a, b)) <= tol * na * nb:
                out.append(p)
    return out


# ---------------------------------------------------------------- genericity


@dataclass
class GenericityReport:
    G1: bool
    G2: bool
    G3: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.G1 and self.G2 and self.G3


def _unit(v):
    n = mpmath.sqrt(mpmath.fsum(abs(c) ** 2 for c in v))
    return [c / n for c in v]


def line_intersection(l1: TernaryForm, l2: TernaryForm) -> list:
    return cross(l1.vector(), l2.vector())


def genericity_check(f: TernaryForm, g: TernaryForm, data: ContactData,
                     precision: int = DEFAULT_PRECISION, tol="1e-20") -> GenericityReport:
    """Check the three general-position conditions used by the Dixon construction."""
    with mpmath.workprec(precision):
        tol = mpmath.mpf(tol)
        pts = [p for p, _ in data.contacts]
        for q, qb in data.pairs:
            pts.extend([q, qb])
        vecs = [_unit([mpmath.mpc(to_mpf(c)) for c in p.coords]) for p in pts]
        bad1 = [
            (pts[i], pts[j], pts[k])
            for i, j, k in itertools.combinations(range(len(vecs)), 3)
            if abs(mpmath.det(mpmath.matrix([vecs[i], vecs[j], vecs[k]]))) <= tol
        ]
        lvecs = [_unit(l.vector()) for l in data.lines]
        bad2 = [
            (i, j, k)
            for i, j, k in itertools.combinations(range(len(lvecs)), 3)
            if abs(mpmath.det(mpmath.matrix([lvecs[i], lvecs[j], lvecs[k]]))) <= tol
        ]
        ff = f.to_float(precision) if f.exact else f
        fn = ff.normalized()
        bad3 = []
        for i, j in itertools.combinations(range(len(data.lines)), 2):
            s = _unit(line_intersection(data.lines[i], data.lines[j]))
            if abs(fn(s)) <= tol:
                bad3.append((i, j, s))
        return GenericityReport(not bad1, not bad2, not bad3,
                                {"G1": bad1, "G2": bad2, "G3": bad3})


# ---------------------------------------------------------------- branches


@dataclass
class BranchExpansion:
    """Local branch of a smooth curve: ``dep = sum c_n (par - par0)^n`` in chart ``chart = 1``."""

    chart: int
    param: int
    dependent: int
    center: tuple
    coefficients: list

    def coordinate_series(self, order: int) -> list[list]:
        """Truncated power series of the three homogeneous coordinates in t."""
        n = order + 1
        out = [[0] * n for _ in range(3)]
        out[self.chart][0] = mpmath.mpf(1)
        out[self.param][0] = self.center[self.param]
        if n > 1:
            out[self.param][1] = mpmath.mpf(1)
        for k, c in enumerate(self.coefficients[:n]):
            out[self.dependent][k] = c
        return out

    def series_of(self, form: TernaryForm, order: int) -> list:
        """Coefficients t^0..t^order of the form restricted to the branch."""
        return _series_eval(form, self.coordinate_series(order), order)


def _series_mul(a, b, n):
    out = [0] * n
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j in range(n - i):
            out[i + j] += x * b[j]
    return out


def _series_eval(form: TernaryForm, coords: list[list], order: int) -> list:
    n = order + 1
    deg = form.degree
    powers = []
    for v in range(3):
        row = [[1] + [0] * (n - 1)]
        for _ in range(deg):
            row.append(_series_mul(row[-1], coords[v], n))
        powers.append(row)
    out = [0] * n
    for (i, j, k), c in form.coeffs.items():
        term = _series_mul(_series_mul(powers[0][i], powers[1][j], n), powers[2][k], n)
        c = to_mpf(c)
        for t in range(n):
            out[t] += c * term[t]
    return out


def branch_expansion(f: TernaryForm, p: ProjPoint | Sequence, order: int,
                     precision: int = DEFAULT_PRECISION) -> BranchExpansion:
    """Taylor coefficients of the branch of V(f) through the smooth point ``p``."""
    if not isinstance(p, ProjPoint):
        p = ProjPoint(p, precision=precision)
    with mpmath.workprec(precision):
        coords = [to_mpf(c) for c in p.real_coords()]
        mods = [abs(c) for c in coords]
        chart = _pivot(mods)
        ff = f.to_float(precision) if f.exact else f
        grad = [d(coords) for d in ff.gradient()]
        gscale = max(abs(c) for c in grad)
        if gscale <= mpmath.mpf(2) ** (-precision // 3) * max(ff.max_abs(), 1):
            raise SingularPointError(f"{p} is a singular point of the curve")
        others = [i for i in range(3) if i != chart]
        dependent = max(others, key=lambda i: abs(grad[i]))
        param = next(i for i in others if i != dependent)
        if abs(grad[dependent]) == 0:
            raise SingularPointError(f"{p} is a singular point in the affine chart")
        center = tuple(coords)
        be = BranchExpansion(chart, param, dependent, center, [coords[dependent]] + [mpmath.mpf(0)] * order)
        fv = grad[dependent]
        for k in range(1, order + 1):
            r = be.series_of(ff, k)[k]
            be.coefficients[k] = -r / fv
        return be
