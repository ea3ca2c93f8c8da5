"""Definite determinantal pencils from interlacers (generalized Dixon construction).

Given a smooth hyperbolic curve ``f`` (hyperbolic with respect to ``e``) and
an interlacer ``g`` of degree ``d-1``, the construction produces symmetric
matrices ``A, B, C`` with ``det(xA + yB + zC) = gamma * f * h`` and
``M(e)`` positive definite, where ``h`` is a product of real lines through
conjugate pairs of non-real intersection points of ``f`` and ``g``.

The work is split into the stages below; :func:`dixon_pipeline` runs them in
order.

1. :func:`contact_basis`  -- forms of degree d-1 vanishing on half the contact divisor
2. :func:`noether_solve`  -- ``b*g - h*a_k*a_l`` divisible by ``f``
3. :func:`adjust_diagonal` / 4. :func:`adjust_offdiagonal` -- corrections by
   multiples of ``f`` so that entries touch the lines ``l_i`` correctly
5. :func:`assemble`       -- the bordered matrix ``N``
6. sign check of ``N[1][1] * D_e(fh)`` on the real zero set of ``fh``
7. :func:`extract_pencil` -- ``M = adj(N) / (fh)^(m-2)``, fitted from samples
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .curves import (
    ContactData,
    GenericityReport,
    IntersectionCycle,
    ProjPoint,
    branch_expansion,
    classify_cycle,
    cross,
    genericity_check,
    intersection_cycle,
)
from .errors import GenericityError, InconsistentInputError, InputError, PrecisionExhausted
from .forms import (
    DEFAULT_PRECISION,
    Divider,
    TernaryForm,
    UnivariatePoly,
    dir_derivative,
    fit_form,
    format_form,
    monomials,
    multiplication_matrix,
    num_monomials,
    restrict,
    to_fraction,
    to_mpf,
)
from .hyperbolic import is_hyperbolic, is_interlacer
from .linalg import LeastSquares, PseudoInverse, mp_orthonormalize

MAX_CONTACT_ORDER = 2


def _tol(precision: int, fraction: float):
    """``2^(-fraction * precision)``: tolerances scale with the working precision."""
    return mpmath.mpf(2) ** (-int(precision * fraction))


def _float(form: TernaryForm, precision: int) -> TernaryForm:
    return form.to_float(precision) if form.exact else form


def _unit(v):
    n = mpmath.sqrt(mpmath.fsum(abs(c) ** 2 for c in v))
    return [c / n for c in v]


# ---------------------------------------------------------------- pencils


@dataclass
class LinearPencil:
    """``M = x*A + y*B + z*C`` with symmetric scalar matrices."""

    A: list[list]
    B: list[list]
    C: list[list]
    gamma: object = None
    precision: int | None | str = "auto"

    def __post_init__(self):
        if self.precision == "auto":
            scalars = [c for M in self.matrices() for row in M for c in row]
            exact = all(isinstance(c, (int, Fraction)) for c in scalars)
            self.precision = None if exact else DEFAULT_PRECISION
        if self.precision is None:
            self.A, self.B, self.C = ([[Fraction(c) for c in row] for row in M]
                                      for M in self.matrices())

    @property
    def size(self) -> int:
        return len(self.A)

    @property
    def exact(self) -> bool:
        return self.precision is None

    def matrices(self) -> tuple[list[list], list[list], list[list]]:
        return self.A, self.B, self.C

    def __call__(self, point: Sequence) -> list[list]:
        x, y, z = point
        n = self.size
        if self.exact and all(isinstance(c, (int, Fraction)) for c in point):
            return [[self.A[i][j] * x + self.B[i][j] * y + self.C[i][j] * z for j in range(n)]
                    for i in range(n)]
        with mpmath.workprec(self.precision or DEFAULT_PRECISION):
            x, y, z = (to_mpf(c) for c in point)
            return [[to_mpf(self.A[i][j]) * x + to_mpf(self.B[i][j]) * y + to_mpf(self.C[i][j]) * z
                     for j in range(n)] for i in range(n)]

    def entry(self, i: int, j: int) -> TernaryForm:
        return TernaryForm.linear(self.A[i][j], self.B[i][j], self.C[i][j], self.precision)

    def forms(self) -> list[list[TernaryForm]]:
        return [[self.entry(i, j) for j in range(self.size)] for i in range(self.size)]

    @classmethod
    def from_forms(cls, entries: Sequence[Sequence[TernaryForm]], gamma=None) -> LinearPencil:
        prec = entries[0][0].precision
        mats = [[[e.coefficient(v) for e in row] for row in entries]
                for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
        return cls(*mats, gamma=gamma, precision=prec)

    def scaled(self, factor) -> LinearPencil:
        with mpmath.workprec(self.precision or DEFAULT_PRECISION):
            mats = [[[c * factor for c in row] for row in M] for M in self.matrices()]
        return LinearPencil(*mats, gamma=self.gamma, precision=self.precision)

    def congruence(self, T: Sequence[Sequence]) -> LinearPencil:
        """The pencil ``T^t M T``."""
        n, k = len(T), len(T[0])
        with mpmath.workprec(self.precision or DEFAULT_PRECISION):
            out = []
            for M in self.matrices():
                MT = [[sum((M[i][l] * T[l][j] for l in range(n)), 0) for j in range(k)]
                      for i in range(n)]
                out.append([[sum((T[l][i] * MT[l][j] for l in range(n)), 0) for j in range(k)]
                            for i in range(k)])
        return LinearPencil(*out, gamma=self.gamma, precision=self.precision)

    def to_float(self, precision: int = DEFAULT_PRECISION) -> LinearPencil:
        with mpmath.workprec(precision):
            mats = [[[to_mpf(c) for c in row] for row in M] for M in self.matrices()]
            gamma = None if self.gamma is None else to_mpf(self.gamma)
        return LinearPencil(*mats, gamma=gamma, precision=precision)

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "A": [[_scalar_str(c, self.precision) for c in row] for row in self.A],
            "B": [[_scalar_str(c, self.precision) for c in row] for row in self.B],
            "C": [[_scalar_str(c, self.precision) for c in row] for row in self.C],
            "gamma": None if self.gamma is None else _scalar_str(self.gamma, self.precision),
            "mode": "exact" if self.exact else "float",
            "precision": self.precision,
        }

    @classmethod
    def from_json(cls, data: dict) -> LinearPencil:
        mode = data.get("mode", "float")
        prec = None if mode == "exact" else int(data.get("precision") or DEFAULT_PRECISION)
        size = int(data["size"])
        mats = []
        for key in ("A", "B", "C"):
            rows = [[_scalar_parse(c, prec) for c in row] for row in data[key]]
            if len(rows) != size or any(len(r) != size for r in rows):
                raise InputError(f"matrix {key} does not have size {size}")
            mats.append(rows)
        gamma = data.get("gamma")
        gamma = None if gamma is None else _scalar_parse(gamma, prec)
        return cls(*mats, gamma=gamma, precision=prec)


def _scalar_str(c, precision: int | None) -> str:
    if precision is None:
        return str(to_fraction(c))
    with mpmath.workprec(precision):
        digits = int(precision * math.log10(2)) + 3
        return mpmath.nstr(to_mpf(c), digits, strip_zeros=True, min_fixed=-4, max_fixed=20)


def _scalar_parse(text, precision: int | None):
    if precision is None:
        return Fraction(str(text))
    with mpmath.workprec(precision):
        return mpmath.mpf(str(text)) if "/" not in str(text) else to_mpf(Fraction(str(text)))


# ---------------------------------------------------------------- state


@dataclass
class DixonState:
    """Intermediate data of one run (all float at ``precision``)."""

    f: TernaryForm
    g: TernaryForm
    e: tuple
    precision: int
    data: ContactData
    lines: list[TernaryForm] = field(default_factory=list)
    h: TernaryForm | None = None
    basis: list[TernaryForm] = field(default_factory=list)
    b: dict = field(default_factory=dict)
    c: dict = field(default_factory=dict)
    touchpoints: dict = field(default_factory=dict)
    r_points: dict = field(default_factory=dict)
    s_points: dict = field(default_factory=dict)
    line0: TernaryForm | None = None
    N: list[list[TernaryForm]] | None = None
    seed: int = 0
    _charts: dict = field(default_factory=dict, repr=False)
    _solver: object = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.f.degree

    @property
    def s(self) -> int:
        return len(self.lines)

    @property
    def size(self) -> int:
        return self.d + self.s


@dataclass
class DixonResult:
    pencil: LinearPencil
    state: DixonState
    genericity: GenericityReport
    cycle: IntersectionCycle
    interlacer_used: TernaryForm
    perturbation: float | None = None
    seed: int = 0

    def to_json(self) -> dict:
        out = self.pencil.to_json()
        out["seed"] = self.seed
        out["perturbation"] = self.perturbation
        out["r"] = self.state.data.r
        out["s"] = self.state.s
        out["lines"] = [format_form(line) for line in self.state.lines]
        return out


# ---------------------------------------------------------------- step 1


def _condition_rows(f: TernaryForm, data: ContactData, precision: int) -> list[list]:
    d = f.degree
    mons = [TernaryForm(d - 1, {m: 1}, precision) for m in monomials(d - 1)]
    rows = []
    for p, mu in data.contacts:
        if mu > MAX_CONTACT_ORDER:
            raise InputError(f"contact of half-multiplicity {mu} at {p} is not supported "
                             f"(maximum {MAX_CONTACT_ORDER})")
        if mu == 1:
            pt = p.real_coords()
            rows.append([m(pt) for m in mons])
            continue
        br = branch_expansion(f, p, mu - 1, precision)
        cs = br.coordinate_series(mu - 1)
        from .curves import _series_eval

        series = [_series_eval(m, cs, mu - 1) for m in mons]
        for k in range(mu):
            rows.append([s[k] for s in series])
    return [_unit(r) for r in rows]


def contact_basis(f: TernaryForm, g: TernaryForm, data: ContactData,
                  precision: int = DEFAULT_PRECISION, seed: int = 0) -> list[TernaryForm]:
    """Basis ``a_1 = g, a_2, ..., a_{d+s}`` of forms vanishing on half the contact divisor.

    The completion is a seeded random orthonormal basis of the complement of
    ``g``; a random one avoids accidental symmetry with the curve.
    """
    d = f.degree
    if g.degree != d - 1:
        raise InputError("the interlacer must have degree deg f - 1")
    n = num_monomials(d - 1)
    target = d + len(data.pairs)
    with mpmath.workprec(precision):
        ff, gf = _float(f, precision), _float(g, precision)
        rows = _condition_rows(ff, data, precision)
        if rows:
            pinv = PseudoInverse(mpmath.matrix(rows), rtol=_tol(precision, 0.25))
            null = pinv.nullspace()
        else:
            null = [[mpmath.mpf(int(i == j)) for i in range(n)] for j in range(n)]
        if len(null) < target:
            raise PrecisionExhausted(
                f"vanishing conditions leave dimension {len(null)} < {target}")
        gv = _unit(gf.vector())
        if rows:
            miss = max(abs(mpmath.fsum(a * b for a, b in zip(r, gv))) for r in rows)
            if miss > _tol(precision, 0.3):
                raise InconsistentInputError(
                    f"g does not vanish on the contact divisor (residual {mpmath.nstr(miss, 5)})")
        rng = random.Random(seed)
        mixed = []
        for _ in null:
            w = [mpmath.mpf(rng.gauss(0, 1)) for _ in null]
            mixed.append([mpmath.fsum(c * v[i] for c, v in zip(w, null)) for i in range(n)])
        ortho = mp_orthonormalize([gv] + mixed)
        if len(ortho) < target:
            raise PrecisionExhausted("basis completion lost rank")
        return [gf] + [TernaryForm.from_vector(d - 1, v, precision) for v in ortho[1:target]]


# ---------------------------------------------------------------- step 2


def _leading_monomial(f: TernaryForm):
    """Lex-leading monomial (over all variable orders) with the largest coefficient."""
    best = None
    for perm in itertools.permutations(range(3)):
        lead = max(f.coeffs, key=lambda m: tuple(m[i] for i in perm))
        if best is None or abs(f.coeffs[lead]) > abs(f.coeffs[best]):
            best = lead
    return best


class NoetherSolver:
    """Solves ``b*g - c*f = rhs`` for ``(b, c)`` with ``b`` reduced modulo ``f``.

    ``b`` is restricted to monomials not divisible by a leading monomial of
    ``f``; this removes the ambiguity ``(b + u f, c + u g)`` and makes the
    solution unique, hence also of minimum norm among reduced solutions.
    """

    def __init__(self, f: TernaryForm, g: TernaryForm, bdeg: int, precision: int):
        self.f, self.g, self.bdeg, self.precision = f, g, bdeg, precision
        d = f.degree
        self.cdeg = bdeg + g.degree - d
        lead = _leading_monomial(f)
        self.bmons = [m for m in monomials(bdeg) if not all(m[i] >= lead[i] for i in range(3))]
        self.cmons = monomials(self.cdeg) if self.cdeg >= 0 else []
        with mpmath.workprec(precision):
            out = monomials(bdeg + g.degree)
            idx = {m: i for i, m in enumerate(out)}
            cols = []
            for m in self.bmons:
                col = [mpmath.mpf(0)] * len(out)
                for e, c in g.coeffs.items():
                    col[idx[(m[0] + e[0], m[1] + e[1], m[2] + e[2])]] += c
                cols.append(col)
            for m in self.cmons:
                col = [mpmath.mpf(0)] * len(out)
                for e, c in f.coeffs.items():
                    col[idx[(m[0] + e[0], m[1] + e[1], m[2] + e[2])]] -= c
                cols.append(col)
            self.out = out
            A = mpmath.matrix(len(out), len(cols))
            for j, col in enumerate(cols):
                for i, v in enumerate(col):
                    A[i, j] = v
            try:
                self.ls = LeastSquares(A)
            except PrecisionExhausted as exc:
                raise GenericityError(f"Noether system is singular: {exc}") from None

    def solve(self, rhs: TernaryForm) -> tuple[TernaryForm, TernaryForm, object]:
        if rhs.degree != self.bdeg + self.g.degree:
            raise InputError("right-hand side has the wrong degree")
        with mpmath.workprec(self.precision):
            vec = mpmath.matrix([to_mpf(rhs.coefficient(m)) for m in self.out])
            x = self.ls.solve(vec)
            resid = self.ls.residual(x, vec)
            nb = len(self.bmons)
            b = TernaryForm(self.bdeg, {m: x[i] for i, m in enumerate(self.bmons)}, self.precision)
            c = TernaryForm(max(self.cdeg, 0), {m: x[nb + i] for i, m in enumerate(self.cmons)},
                            self.precision)
            return b, c, resid


def noether_solve(f: TernaryForm, g: TernaryForm, h: TernaryForm, ak: TernaryForm,
                  al: TernaryForm, precision: int = DEFAULT_PRECISION,
                  solver: NoetherSolver | None = None) -> TernaryForm:
    """``b`` of degree ``d+s-1`` with ``b*g - h*ak*al`` divisible by ``f``."""
    d = f.degree
    if g.degree != d - 1 or ak.degree != d - 1 or al.degree != d - 1:
        raise InputError("noether_solve expects g, a_k, a_l of degree deg f - 1")
    bdeg = h.degree + d - 1
    with mpmath.workprec(precision):
        ff, gf, hf = _float(f, precision), _float(g, precision), _float(h, precision)
        if solver is None:
            solver = NoetherSolver(ff, gf, bdeg, precision)
        rhs = hf * _float(ak, precision) * _float(al, precision)
        b, _, resid = solver.solve(rhs)
        if resid > _tol(precision, 0.365):
            raise GenericityError(
                f"Noether division failed (relative residual {mpmath.nstr(resid, 5)})")
        return b


# ---------------------------------------------------------------- steps 3 and 4


@dataclass
class _LineChart:
    """A real line ``l_i`` parametrized as ``P0 + t*P1``, with its restricted data."""

    index: int
    P0: list
    P1: list
    Q: UnivariatePoly          # monic, roots at the conjugate pair on the line
    P: UnivariatePoly          # restriction of f*h/(l_i * Q): roots r_ij and s_ij
    r_params: list
    s_params: dict

    def point(self, t) -> list:
        return [a + t * b for a, b in zip(self.P0, self.P1)]

    def restrict(self, form: TernaryForm) -> UnivariatePoly:
        return restrict(form, self.P1, self.P0)


def _line_frame(line: TernaryForm, angle) -> tuple[list, list]:
    v = _unit([to_mpf(c) for c in line.vector()])
    ref = min(range(3), key=lambda i: abs(v[i]))
    u = [mpmath.mpf(int(i == ref)) for i in range(3)]
    a = _unit(cross(v, u))
    b = _unit(cross(v, a))
    c, s = mpmath.cos(angle), mpmath.sin(angle)
    return [c * x + s * y for x, y in zip(a, b)], [-s * x + c * y for x, y in zip(a, b)]


def _line_charts(state: DixonState, rng: random.Random) -> None:
    P = state.precision
    f = state.f
    fn = f.normalized()
    lines = state.lines
    for i, line in enumerate(lines):
        q = state.data.pairs[i][0]
        for _ in range(20):
            P0, P1 = _line_frame(line, mpmath.mpf(rng.uniform(0.1, 3.0)))
            # the point at t = infinity must avoid all special points
            if abs(fn(P1)) > 1e-3 and all(abs(l.normalized()(P1)) > 1e-3
                                          for j, l in enumerate(lines) if j != i):
                qa = [mpmath.mpc(to_mpf(c)) for c in q.coords]
                if abs(mpmath.fsum(x * y for x, y in zip(qa, P1))) > 1e-3 * max(abs(c) for c in qa):
                    break
        else:
            raise GenericityError(f"no usable parametrization of line {i}")
        qa = [mpmath.mpc(to_mpf(c)) for c in q.coords]
        alpha = mpmath.fsum(x * y for x, y in zip(qa, P0))
        beta = mpmath.fsum(x * y for x, y in zip(qa, P1))
        tq = beta / alpha
        Q = UnivariatePoly([abs(tq) ** 2, -2 * mpmath.re(tq), 1], P)
        F = restrict(f, P1, P0)
        R, rem = F.divmod(Q)
        if max((abs(c) for c in rem.coeffs), default=0) > _tol(P, 0.3) * max(abs(c) for c in F.coeffs):
            raise GenericityError(f"conjugate pair does not divide f on line {i}")
        S = UnivariatePoly([1], P)
        s_params = {}
        for j, other in enumerate(lines):
            if j == i:
                continue
            lin = restrict(other, P1, P0)
            S = S * lin
            s_params[j] = -lin.coeffs[0] / lin.coeffs[1]
        r_params = _real_roots(R)
        chart = _LineChart(i, P0, P1, Q, R * S, r_params, s_params)
        state._charts[i] = chart
        state.r_points[i] = [chart.point(t) for t in r_params]


def _real_roots(p: UnivariatePoly) -> list:
    if p.degree < 1:
        return []
    roots = mpmath.polyroots(list(reversed(p.coeffs)), maxsteps=200, extraprec=2 * p.precision)
    return sorted(mpmath.re(r) for r in roots if abs(mpmath.im(r)) < _tol(p.precision, 0.25))


def _reduced_quadratic(chart: _LineChart, form: TernaryForm, what: str) -> UnivariatePoly:
    """``form|l_i / P`` (the quadratic left after deflating the known roots)."""
    R = chart.restrict(form)
    q, rem = R.divmod(chart.P)
    scale = form.max_abs() or mpmath.mpf(1)
    if max((abs(c) for c in rem.coeffs), default=0) > _tol(R.precision, 0.3) * scale:
        raise GenericityError(f"{what} does not vanish at the known points of line {chart.index}")
    return UnivariatePoly(list(q.coeffs) + [0] * (3 - len(q.coeffs)), R.precision)


def _coeff(p: UnivariatePoly, k: int):
    return p.coeffs[k] if k < len(p.coeffs) else mpmath.mpf(0)


def _pick_line0(state: DixonState, rng: random.Random) -> TernaryForm | None:
    if state.s < 2:
        return None
    pts = [_unit(p) for p in state.s_points.values()]
    for _ in range(5):
        coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(3)]
        if not any(coeffs):
            continue
        l0 = TernaryForm.linear(*coeffs).to_float(state.precision)
        ln = l0.normalized()
        if all(abs(ln(p)) > 1e-3 for p in pts):
            return l0
    raise GenericityError("no auxiliary line avoiding all line intersections")


def _h_without(state: DixonState, skip: Sequence[int]) -> TernaryForm:
    out = TernaryForm.constant(1, state.precision)
    for j, line in enumerate(state.lines):
        if j not in skip:
            out = out * line
    return out


def _kill_s_points(state: DixonState, b: TernaryForm) -> TernaryForm:
    """Add multiples of ``h_ij * f`` so that ``b`` vanishes at every ``s_ij``."""
    if state.s < 2:
        return b
    out = b
    for (i, j), pt in state.s_points.items():
        hij = state.line0 * _h_without(state, (i, j))
        alpha = -b(pt) / (hij(pt) * state.f(pt))
        out = out + hij * state.f * alpha
    return out


def adjust_diagonal(state: DixonState, k: int) -> TernaryForm:
    """Correct ``b_kk`` so its restriction to every ``l_i`` is a nonnegative square times data."""
    b = state.b[(k, k)]
    if state.s == 0:
        state.c[(k, k)] = b
        return b
    P = state.precision
    with mpmath.workprec(P):
        b = _kill_s_points(state, b)
        state.b[(k, k)] = b
        alphas = []
        for i, chart in state._charts.items():
            bt = _reduced_quadratic(chart, b, f"b[{k},{k}]")
            b0, b1, b2 = (_coeff(bt, j) for j in range(3))
            q0, q1, q2 = (_coeff(chart.Q, j) for j in range(3))
            qa = q1 * q1 - 4 * q0 * q2
            qb = 2 * b1 * q1 - 4 * (b0 * q2 + b2 * q0)
            qc = b1 * b1 - 4 * b0 * b2
            if qa >= 0:
                raise GenericityError(f"restriction of f to line {i} has real roots off the known points")
            disc = qb * qb - 4 * qa * qc
            if disc < -_tol(P, 0.3) * (qb * qb + abs(4 * qa * qc)):
                raise PrecisionExhausted(f"no real double-root correction on line {i}")
            root = mpmath.sqrt(max(disc, 0))
            candidates = sorted([(-qb + root) / (2 * qa), (-qb - root) / (2 * qa)], reverse=True)
            chosen = None
            for alpha in candidates:
                lead = b2 + alpha * q2
                if lead > 0:
                    chosen = alpha
                    break
            if chosen is None:
                raise PrecisionExhausted(f"both double-root corrections fail the sign test on line {i}")
            lead = b2 + chosen * q2
            tau = -(b1 + chosen * q1) / (2 * lead)
            alphas.append((i, chosen))
            state.touchpoints[(k, i)] = (tau, chart.point(tau))
        c = b + _q_alpha(state, alphas) * state.f
        _check_diagonal(state, k, c)
        state.c[(k, k)] = c
        return c


def _q_alpha(state: DixonState, alphas: Sequence[tuple[int, object]]) -> TernaryForm:
    out = TernaryForm.zero(state.s - 1, state.precision)
    for i, a in alphas:
        out = out + _h_without(state, (i,)) * a
    return out


def _check_diagonal(state: DixonState, k: int, c: TernaryForm) -> None:
    """Double root at each touchpoint and the sign condition along each line."""
    P = state.precision
    cn = c.normalized()
    for i, chart in state._charts.items():
        tau, _ = state.touchpoints[(k, i)]
        R = chart.restrict(cn)
        scale = max(abs(x) for x in R.coeffs)
        if abs(R(tau)) > 1e-10 * scale or abs(R.derivative()(tau)) > 1e-10 * scale:
            raise PrecisionExhausted(f"c[{k},{k}] has no double root at its touchpoint on line {i}")
        other = _h_without(state, (i,)) * state.f
        on = other.normalized()
        sign_e = state.lines[i](state.e)
        worst = mpmath.mpf(0)
        for t in (mpmath.mpf(j) / 4 - 3 for j in range(25)):
            pt = chart.point(t)
            worst = min(worst, cn(pt) * on(pt) * sign_e)
        if worst < -_tol(P, 0.3):
            raise PrecisionExhausted(f"sign condition fails on line {i} for c[{k},{k}]")


def adjust_offdiagonal(state: DixonState, k: int, l: int) -> TernaryForm:
    """Correct ``b_kl`` to vanish at the touchpoints ``t_ki`` (and hence ``t_li``)."""
    b = state.b[(k, l)]
    if state.s == 0:
        state.c[(k, l)] = b
        return b
    with mpmath.workprec(state.precision):
        b = _kill_s_points(state, b)
        state.b[(k, l)] = b
        alphas = []
        for i, chart in state._charts.items():
            bt = _reduced_quadratic(chart, b, f"b[{k},{l}]")
            tk, _ = state.touchpoints[(k, i)]
            tl, _ = state.touchpoints[(l, i)]
            alpha = -bt(tk) / chart.Q(tk)
            ct = bt + chart.Q * alpha
            scale = max(abs(x) for x in ct.coeffs) if not ct.is_zero() else mpmath.mpf(1)
            if abs(ct(tl)) > 1e-8 * scale * max(1, abs(tl)) ** 2:
                raise GenericityError(
                    f"c[{k},{l}] vanishes at t[{k},{i}] but not at t[{l},{i}] "
                    f"(residual {mpmath.nstr(abs(ct(tl)) / scale, 5)})")
            alphas.append((i, alpha))
        c = b + _q_alpha(state, alphas) * state.f
        state.c[(k, l)] = c
        return c


# ---------------------------------------------------------------- steps 5-7


def assemble(state: DixonState, check: bool = True) -> list[list[TernaryForm]]:
    """The symmetric matrix ``N`` with first row ``h * a_k`` and entries ``c_kl``."""
    m = state.size
    h = state.h
    N = [[None] * m for _ in range(m)]
    with mpmath.workprec(state.precision):
        for k in range(m):
            N[0][k] = N[k][0] = h * state.basis[k]
        for k in range(1, m):
            for l in range(k, m):
                N[k][l] = N[l][k] = state.c[(k, l)]
        state.N = N
        if check:
            _check_minors(state)
    return N


def _check_minors(state: DixonState) -> None:
    N = state.N
    m = state.size
    fh = state.f * state.h
    deg = 2 * N[0][0].degree - fh.degree
    divider = Divider(fh, deg, state.precision)
    pairs = list(itertools.combinations(range(m), 2))
    for a, (k1, k2) in enumerate(pairs):
        for (l1, l2) in pairs[a:]:
            minor = N[k1][l1] * N[k2][l2] - N[k1][l2] * N[k2][l1]
            if minor.is_zero():
                continue
            _, res = divider.divide(minor)
            # relative to the size of the two products, not the (possibly cancelled) minor
            scale = (N[k1][l1].norm() * N[k2][l2].norm() + N[k1][l2].norm() * N[k2][l1].norm())
            res = res * minor.norm() / scale
            if res > 1e-10:
                raise GenericityError(
                    f"2x2 minor (rows {k1 + 1},{k2 + 1}; cols {l1 + 1},{l2 + 1}) is not "
                    f"divisible by f*h (residual {mpmath.nstr(res, 5)})")


def real_points_on(f: TernaryForm, e: Sequence, count: int, rng: random.Random) -> list[list]:
    """Real points of V(f) on ``count`` random lines through ``e``."""
    out = []
    for _ in range(count):
        v = [mpmath.mpf(rng.gauss(0, 1)) for _ in range(3)]
        p = restrict(f, e, v)
        for t in _real_roots(p):
            out.append(_unit([t * a + b for a, b in zip(e, v)]))
    return out


def step6_check(state: DixonState, samples: int = 24, seed: int = 0) -> object:
    """Minimum of ``N[1][1] * D_e(fh)`` over sampled real points of ``V(fh)`` (normalized)."""
    if state.size < 2:
        return mpmath.mpf(0)
    rng = random.Random(seed)
    with mpmath.workprec(state.precision):
        fh = state.f * state.h
        c22 = state.N[1][1].normalized()
        dfh = dir_derivative(fh, [to_mpf(c) for c in state.e]).normalized()
        pts = real_points_on(state.f, [to_mpf(c) for c in state.e], samples, rng)
        for chart in state._charts.values():
            pts.extend(_unit(chart.point(mpmath.mpf(rng.uniform(-5, 5)))) for _ in range(samples))
        worst = min((c22(p) * dfh(p) for p in pts), default=mpmath.mpf(0))
        if worst < -_tol(state.precision, 0.3):
            raise GenericityError(
                f"N[2][2] * D_e(fh) is negative on V(fh) (min {mpmath.nstr(worst, 5)})")
        return worst


def _random_points(n: int, rng: random.Random, avoid: TernaryForm, precision: int) -> list[list]:
    an = avoid.normalized()
    pts = []
    while len(pts) < n:
        p = [mpmath.mpf(rng.randint(-1000, 1000)) / 1000 for _ in range(3)]
        u = _unit(p) if any(p) else None
        if u is not None and abs(an(u)) > 1e-4:
            pts.append(p)
    return pts


def extract_pencil(state: DixonState, samples: int | None = None, seed: int = 0) -> LinearPencil:
    """Fit ``M = adj(N) / (fh)^(m-2)`` entrywise by linear forms."""
    m = state.size
    P = state.precision
    rng = random.Random(seed)
    n = samples or 10 * m * m
    with mpmath.workprec(P):
        fh = state.f * state.h
        pts = _random_points(n, rng, fh, P)
        values = [[[None] * n for _ in range(m)] for _ in range(m)]
        for p_idx, p in enumerate(pts):
            Na = mpmath.matrix([[state.N[i][j](p) for j in range(m)] for i in range(m)])
            if m == 1:
                adj = mpmath.matrix([[1]])
            else:
                adj = mpmath.det(Na) * mpmath.inverse(Na)
            scale = fh(p) ** (m - 2)
            for i in range(m):
                for j in range(i, m):
                    values[i][j][p_idx] = adj[i, j] / scale
        ls = LeastSquares(mpmath.matrix(pts))
        entries = [[None] * m for _ in range(m)]
        worst = mpmath.mpf(0)
        overall = max(abs(v) for row in values for col in row for v in col if v is not None)
        for i in range(m):
            for j in range(i, m):
                b = mpmath.matrix(values[i][j])
                x = ls.solve(b)
                worst = max(worst, mpmath.norm(ls.A * x - b, mpmath.inf) / overall)
                entries[i][j] = entries[j][i] = TernaryForm.linear(x[0], x[1], x[2], P)
        if worst > 1e-10:
            raise PrecisionExhausted(
                f"adjugate quotient is not linear (fit residual {mpmath.nstr(worst, 5)})")
        pencil = LinearPencil.from_forms(entries)
        top = max(abs(c) for M in pencil.matrices() for row in M for c in row)
        pencil = pencil.scaled(1 / top)
        for M in pencil.matrices():  # drop round-off noise
            for row in M:
                for j, c in enumerate(row):
                    if abs(c) < _tol(P, 0.75):
                        row[j] = mpmath.mpf(0)
        e = [to_mpf(c) for c in state.e]
        Me = mpmath.matrix(pencil(e))
        eig = mpmath.eigsy(Me, eigvals_only=True)
        if max(eig) <= 0:
            pencil = pencil.scaled(-1)
            eig = [-v for v in eig]
        if min(eig) <= 0:
            raise PrecisionExhausted("the fitted pencil is not definite at e")
        pencil.gamma = pencil_gamma(pencil, state.f, state.h, rng)
        if pencil.gamma < mpmath.mpf("1e-20"):
            raise PrecisionExhausted(f"degenerate representation (gamma = {mpmath.nstr(pencil.gamma, 5)})")
        return pencil


def pencil_gamma(pencil: LinearPencil, f: TernaryForm, h: TernaryForm,
                 rng: random.Random | None = None, points: int = 5):
    """``det M(a) / (f(a) h(a))`` at random points; raises if the ratio is not constant."""
    rng = rng or random.Random(0)
    P = pencil.precision or DEFAULT_PRECISION
    with mpmath.workprec(P):
        fh = _float(f, P) * _float(h, P)
        ratios = []
        for p in _random_points(points, rng, fh, P):
            ratios.append(mpmath.det(mpmath.matrix(pencil(p))) / fh(p))
        spread = max(abs(r - ratios[0]) for r in ratios)
        if spread > 1e-10 * abs(ratios[0]):
            raise PrecisionExhausted("det M / (f h) is not constant")
        return ratios[0]


# ---------------------------------------------------------------- pipeline


def _prepare(f: TernaryForm, g: TernaryForm, e: Sequence, precision: int):
    d = f.degree
    if d < 2:
        raise InputError("the curve must have degree at least 2")
    if g.degree != d - 1:
        raise InputError(f"the interlacer must have degree {d - 1}")
    fe = f(e)
    if fe == 0:
        raise InputError("f vanishes at e")
    if fe < 0:
        f = -f
    ge = g(e)
    if ge == 0:
        raise InputError("g vanishes at e, so it cannot interlace f")
    if ge < 0:
        g = -g
    return f, g


def build_state(f: TernaryForm, g: TernaryForm, e: Sequence, data: ContactData,
                precision: int = DEFAULT_PRECISION, seed: int = 0) -> DixonState:
    """Run steps 1-5 on prepared input (``f(e) > 0``, ``g(e) > 0``)."""
    rng = random.Random(seed)
    with mpmath.workprec(precision):
        ff = _float(f, precision)
        gf = _float(g, precision)
        gf = gf / gf.max_abs()
        ev = tuple(to_mpf(c) for c in e)
        state = DixonState(ff, gf, ev, precision, data, seed=seed)
        state.lines = [_float(l, precision) for l in data.lines]
        for i, j in itertools.combinations(range(len(state.lines)), 2):
            if max(abs(c) for c in cross(state.lines[i].vector(), state.lines[j].vector())) < 1e-12:
                raise GenericityError(f"lines {i} and {j} coincide")
            state.s_points[(i, j)] = cross(state.lines[i].vector(), state.lines[j].vector())
        state.h = _h_without(state, ())
        state.basis = contact_basis(ff, gf, data, precision, seed)
        state.line0 = _pick_line0(state, rng)
        if state.s:
            _line_charts(state, rng)
        m = state.size
        solver = NoetherSolver(ff, gf, state.h.degree + ff.degree - 1, precision)
        for k in range(1, m):
            for l in range(k, m):
                state.b[(k, l)] = noether_solve(ff, gf, state.h, state.basis[k], state.basis[l],
                                                precision, solver)
        for k in range(1, m):
            adjust_diagonal(state, k)
        for k in range(1, m):
            for l in range(k + 1, m):
                adjust_offdiagonal(state, k, l)
        assemble(state)
        return state


@dataclass
class DixonOptions:
    precision: int = DEFAULT_PRECISION
    seed: int = 0
    perturb: bool = False
    samples: int = 64
    check_input: bool = True
    max_perturb_steps: int = 4


def dixon_pipeline(f: TernaryForm, g: TernaryForm, e: Sequence,
                   options: DixonOptions | None = None, **kwargs) -> DixonResult:
    """Definite determinantal pencil of ``f * h`` built from the interlacer ``g``.

    Keyword arguments override fields of :class:`DixonOptions`.
    """
    opts = options or DixonOptions()
    for key, value in kwargs.items():
        if not hasattr(opts, key):
            raise TypeError(f"unknown option {key!r}")
        setattr(opts, key, value)
    P = opts.precision
    e = tuple(e)
    f, g = _prepare(f, g, e, P)
    if opts.check_input:
        hyp = is_hyperbolic(f, e, n=max(opts.samples // 4, 20), seed=opts.seed)
        if not hyp:
            raise InputError(f"f is not hyperbolic with respect to e (witness {hyp.witness})")
        rep = is_interlacer(f, g, e, samples=opts.samples, seed=opts.seed)
        if not rep.is_interlacer:
            raise InputError("g does not interlace f with respect to e")
    attempts: list[tuple[float | None, TernaryForm]] = [(None, g)]
    if opts.perturb:
        deriv = dir_derivative(f, e)
        deriv = deriv / deriv.max_abs() * g.max_abs()
        for k in range(3, 3 + opts.max_perturb_steps):
            eps = Fraction(1, 10 ** k) if g.exact and deriv.exact else 10.0 ** (-k)
            if g.exact and deriv.exact:
                attempts.append((float(eps), g * (1 - eps) + deriv * eps))
            else:
                gf, df = _float(g, P), _float(deriv, P)
                attempts.append((float(eps), gf * (1 - eps) + df * eps))
    last_error: Exception | None = None
    for eps, gi in attempts:
        try:
            return _run_once(f, gi, e, P, opts.seed, eps)
        except (GenericityError, PrecisionExhausted) as exc:
            last_error = exc
            if not opts.perturb:
                raise
    assert last_error is not None
    raise last_error


def _run_once(f, g, e, precision, seed, eps) -> DixonResult:
    cycle = intersection_cycle(f, g, seed=seed, precision=precision)
    data = classify_cycle(cycle, e, precision)
    report = genericity_check(f, g, data, precision)
    if not (report.G2 and report.G3):
        raise GenericityError(f"lines of conjugate pairs are not in general position: {report}")
    state = build_state(f, g, e, data, precision, seed)
    step6_check(state, seed=seed)
    pencil = extract_pencil(state, seed=seed)
    expected = (f.degree ** 2 + f.degree - 2 * data.r) // 2
    if pencil.size != expected:
        raise PrecisionExhausted(f"pencil size {pencil.size} differs from {expected}")
    return DixonResult(pencil, state, report, cycle, g, eps, seed)
