"""Independent verification of a claimed definite pencil for a hyperbolic curve."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .dixon import DixonState, LinearPencil
from .errors import InputError
from .forms import (
    DEFAULT_PRECISION,
    TernaryForm,
    divide,
    fit_form,
    monomials,
    num_monomials,
    to_mpf,
)
from .fastnum import batched_roots, eval_form, restriction_coefficients
from .linalg import exact_det, exact_inertia

DET_TOL = 1e-10
DIV_TOL = 1e-10
BAND = 1e-6
PSD_TOL = 1e-10
CORANK_TOL = 1e-8


@dataclass
class RegionAgreement:
    samples: int
    disagreements: int
    boundary_excluded: int
    antipodal_violations: int
    witnesses: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "disagreements": self.disagreements,
            "boundary_excluded": self.boundary_excluded,
            "antipodal_violations": self.antipodal_violations,
            "witnesses": [[float(c) for c in w] for w in self.witnesses[:10]],
        }


@dataclass
class Certificate:
    det_residual: object
    gamma: object
    cofactor: TernaryForm | None
    min_eigenvalue: object
    divisibility: dict
    region: RegionAgreement | None
    corank: list
    reasons: list
    seed: int = 0
    exact: bool = False

    @property
    def passed(self) -> bool:
        return not self.reasons

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        from .forms import form_to_json

        def num(v):
            if v is None:
                return None
            if isinstance(v, Fraction):
                return str(v)
            return mpmath.nstr(to_mpf(v), 17)

        return {
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "det_residual": num(self.det_residual),
            "gamma": num(self.gamma),
            "cofactor": None if self.cofactor is None else form_to_json(self.cofactor),
            "min_eigenvalue_at_e": num(self.min_eigenvalue),
            "divisibility": {k: num(v) for k, v in self.divisibility.items()},
            "region": None if self.region is None else self.region.to_json(),
            "corank": self.corank,
            "seed": self.seed,
            "mode": "exact" if self.exact else "float",
        }


# ---------------------------------------------------------------- determinants as forms


def lattice_points(degree: int) -> list[tuple[int, int, int]]:
    """Integer points ``(i, j, k)`` with ``i + j + k = degree``; unisolvent for forms of that degree."""
    return [tuple(m) for m in monomials(degree)]


def _minor(rows: list[list], skip_row: int | None, skip_col: int | None) -> list[list]:
    return [[v for j, v in enumerate(r) if j != skip_col] for i, r in enumerate(rows) if i != skip_row]


def pencil_minor_form(pencil: LinearPencil, skip_row: int | None = None,
                      skip_col: int | None = None) -> tuple[TernaryForm, object]:
    """A minor of the pencil (or its determinant) as a form, with the fit residual.

    Exact pencils are interpolated exactly on the lattice points; float
    pencils are fitted by least squares on the lattice plus random points.
    """
    m = pencil.size - (skip_row is not None)
    if m == 0:
        prec = pencil.precision
        return TernaryForm.constant(1, prec), 0
    pts = lattice_points(m)
    if pencil.exact:
        vals = [exact_det(_minor(pencil(p), skip_row, skip_col)) for p in pts]
        return fit_form(m, pts, vals)
    P = pencil.precision
    rng = random.Random(1)
    with mpmath.workprec(P):
        pts = [[mpmath.mpf(c) for c in p] for p in pts]
        pts += [[mpmath.mpf(rng.gauss(0, 1)) for _ in range(3)] for _ in range(num_monomials(m))]
        vals = [mpmath.det(mpmath.matrix(_minor(pencil(p), skip_row, skip_col))) for p in pts]
        return fit_form(m, pts, vals, P)


def cofactor_form(pencil: LinearPencil, i: int, j: int) -> TernaryForm:
    form, _ = pencil_minor_form(pencil, i, j)
    return form * (-1) ** (i + j)


# ---------------------------------------------------------------- region sampling


def region_agreement(f: TernaryForm, e: Sequence, pencil: LinearPencil, cofactor: TernaryForm | None,
                     samples: int = 10_000, seed: int = 0, band: float = BAND) -> RegionAgreement:
    """Compare PSD-membership of ``M(a)`` with hyperbolicity-cone membership on random points."""
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((samples, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    ev = np.array([float(c) for c in e])
    ev = ev / np.linalg.norm(ev)
    eq = [Fraction(c).limit_denominator(10 ** 12) if not isinstance(c, Fraction) else c for c in ev]
    fx = f.to_exact() if not f.exact else f
    fx = fx / fx.max_abs()
    roots = batched_roots(restriction_coefficients(fx, eq, pts))
    near = np.min(np.abs(roots), axis=1) < band
    if cofactor is not None and cofactor.degree > 0:
        cx = cofactor.to_exact() if not cofactor.exact else cofactor
        cx = cx / cx.max_abs()
    if cofactor is not None and cofactor.degree > 0 and cx(eq) != 0:
        croots = batched_roots(restriction_coefficients(cx, eq, pts))
        near |= np.min(np.abs(croots), axis=1) < band
    inside_f = np.max(roots.real, axis=1) <= 0
    A, B, C = (np.array([[float(c) for c in row] for row in M]) for M in pencil.matrices())
    Ms = pts[:, 0, None, None] * A + pts[:, 1, None, None] * B + pts[:, 2, None, None] * C
    eig = np.linalg.eigvalsh(Ms)
    scale = np.max(np.abs(eig), axis=1)
    inside_m = eig[:, 0] >= -PSD_TOL * scale
    inside_m_neg = (-eig[:, -1]) >= -PSD_TOL * scale
    keep = ~near
    bad = keep & (inside_f != inside_m)
    antipodal = keep & inside_m & inside_m_neg
    return RegionAgreement(
        samples=int(samples),
        disagreements=int(bad.sum()),
        boundary_excluded=int(near.sum()),
        antipodal_violations=int(antipodal.sum()),
        witnesses=[list(p) for p in pts[bad][:10]],
    )


# ---------------------------------------------------------------- coranks


def _corank(pencil: LinearPencil, point: Sequence, precision: int) -> tuple[int, list]:
    with mpmath.workprec(precision):
        pt = [mpmath.mpc(to_mpf(c)) if not isinstance(c, mpmath.mpc) else c for c in point]
        n = pencil.size
        M = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                M[i, j] = (to_mpf(pencil.A[i][j]) * pt[0] + to_mpf(pencil.B[i][j]) * pt[1]
                           + to_mpf(pencil.C[i][j]) * pt[2])
        sv = mpmath.svd_c(M, compute_uv=False)
        vals = sorted((sv[i] for i in range(n)), reverse=True)
        top = vals[0] if vals[0] else mpmath.mpf(1)
        return sum(1 for v in vals if v <= CORANK_TOL * top), [mpmath.nstr(v / top, 5) for v in vals]


def corank_table(pencil: LinearPencil, state: DixonState, precision: int) -> list[dict]:
    """Coranks of ``M`` at the auxiliary points (expected 2) and non-real intersections (expected 1)."""
    rows = []
    for i, pts in state.r_points.items():
        for p in pts:
            k, sv = _corank(pencil, p, precision)
            rows.append({"kind": "r", "line": i, "corank": k, "expected": 2, "singular_values": sv})
    for (i, j), p in state.s_points.items():
        k, sv = _corank(pencil, p, precision)
        rows.append({"kind": "s", "lines": [i, j], "corank": k, "expected": 2, "singular_values": sv})
    for i, (q, _) in enumerate(state.data.pairs):
        k, sv = _corank(pencil, list(q.coords), precision)
        rows.append({"kind": "q", "line": i, "corank": k, "expected": 1, "singular_values": sv})
    return rows


# ---------------------------------------------------------------- main entry


def certify_pencil(f: TernaryForm, e: Sequence, pencil: LinearPencil, g: TernaryForm | None = None,
                   state: DixonState | None = None, samples: int = 10_000, seed: int = 0,
                   cofactor: TernaryForm | None = None) -> Certificate:
    """Check a claimed representation ``det M = gamma * f * h`` with ``M(e)`` definite.

    ``h`` comes from ``cofactor`` or ``state`` if given; otherwise it is
    recovered as ``det M / (gamma f)``.
    """
    if len(e) != 3:
        raise InputError("e must have three coordinates")
    m = pencil.size
    if any(len(M) != m or any(len(r) != m for r in M) for M in pencil.matrices()):
        raise InputError("pencil matrices are not square of the stated size")
    if m < f.degree:
        raise InputError("pencil is smaller than the degree of f")
    exact = pencil.exact and f.exact and all(isinstance(c, (int, Fraction)) for c in e)
    fe = f(e)
    if fe == 0:
        raise InputError("f vanishes at e")
    if fe < 0:
        f = -f
    reasons: list[str] = []
    P = pencil.precision or DEFAULT_PRECISION
    h = cofactor if cofactor is not None else (state.h if state is not None else None)
    if exact:
        cert = _exact_checks(f, e, pencil, g, h, reasons)
    else:
        cert = _float_checks(f, e, pencil, g, h, reasons, P, seed)
    det_residual, gamma, h, min_eig, divis = cert
    region = region_agreement(f, e, pencil, h, samples, seed) if samples else None
    if region is not None:
        if region.disagreements:
            reasons.append(f"region disagreement at {region.disagreements} of {samples} samples")
        if region.antipodal_violations:
            reasons.append("PSD set is not pointed")
    corank = corank_table(pencil, state, P) if state is not None else []
    for row in corank:
        if row["corank"] != row["expected"]:
            reasons.append(f"corank {row['corank']} at a {row['kind']} point (expected {row['expected']})")
    return Certificate(det_residual, gamma, h, min_eig, divis, region, corank, reasons, seed, exact)


def _exact_checks(f, e, pencil, g, h, reasons):
    det_form, _ = pencil_minor_form(pencil)
    quot, res = divide(det_form, f)
    if res != 0:
        reasons.append("det M is not divisible by f")
        return res, pencil.gamma, h, None, {}
    gamma = Fraction(pencil.gamma) if pencil.gamma is not None else None
    if h is not None and h.exact:
        if h.degree != quot.degree:
            reasons.append("cofactor degree does not match the pencil size")
            det_residual = Fraction(1)
        else:
            # det M = gamma f h  <=>  quot = gamma h
            ratio = _form_ratio(quot, h)
            if ratio is None or (gamma is not None and ratio != gamma):
                reasons.append("det M is not gamma * f * h")
                det_residual = Fraction(1)
            else:
                gamma, det_residual = ratio, Fraction(0)
    else:
        if gamma is None:
            gamma = Fraction(1)
        h = quot / gamma
        det_residual = Fraction(0)
    Me = pencil(list(e))
    pos, neg, zero = exact_inertia(Me)
    with mpmath.workprec(DEFAULT_PRECISION):
        min_eig = min(mpmath.eigsy(mpmath.matrix([[to_mpf(c) for c in r] for r in Me]),
                                   eigvals_only=True))
    if pos != pencil.size:
        reasons.append(f"M(e) is not positive definite (inertia {pos}, {neg}, {zero})")
    if gamma is not None and gamma <= 0:
        reasons.append("gamma is not positive")
    divis = _divisibility(pencil, g, h, reasons)
    return det_residual, gamma, h, min_eig, divis


def _form_ratio(a: TernaryForm, b: TernaryForm):
    """The scalar c with a = c b exactly, or None."""
    if b.is_zero():
        return None
    mono = next(iter(b.coeffs))
    c = a.coefficient(mono) / b.coeffs[mono]
    return c if (a - b * c).is_zero() else None


def _float_checks(f, e, pencil, g, h, reasons, P, seed):
    rng = random.Random(seed)
    with mpmath.workprec(P):
        ff = f.to_float(P) if f.exact else f
        gamma = pencil.gamma
        if h is None:
            det_form, fit_res = pencil_minor_form(pencil)
            quot, res = divide(det_form, ff)
            if res > DET_TOL or fit_res > DET_TOL:
                reasons.append(f"det M is not divisible by f (residual {mpmath.nstr(res, 5)})")
            g_ = to_mpf(gamma) if gamma is not None else mpmath.mpf(1)
            h = quot / g_
        hf = h.to_float(P) if h.exact else h
        if gamma is None:
            pts = [[mpmath.mpf(rng.gauss(0, 1)) for _ in range(3)] for _ in range(3)]
            gamma = mpmath.det(mpmath.matrix(pencil(pts[0]))) / (ff(pts[0]) * hf(pts[0]))
        gamma = to_mpf(gamma)
        fn, hn = ff / ff.max_abs(), hf / hf.max_abs()
        gscale = gamma * ff.max_abs() * hf.max_abs()
        worst = mpmath.mpf(0)
        dets = []
        for _ in range(50):
            p = [mpmath.mpf(rng.gauss(0, 1)) for _ in range(3)]
            nrm = mpmath.sqrt(mpmath.fsum(c * c for c in p))
            p = [c / nrm for c in p]
            dm = mpmath.det(mpmath.matrix(pencil(p)))
            dets.append(abs(dm))
            worst = max(worst, abs(dm - gscale * fn(p) * hn(p)))
        det_residual = worst / max(max(dets), abs(gscale) * mpmath.mpf("1e-300"))
        if det_residual > DET_TOL:
            reasons.append(f"det M differs from gamma f h (residual {mpmath.nstr(det_residual, 5)})")
        if gamma <= 0:
            reasons.append("gamma is not positive")
        ev = [to_mpf(c) for c in e]
        eig = mpmath.eigsy(mpmath.matrix(pencil(ev)), eigvals_only=True)
        min_eig = min(eig)
        if min_eig <= 0:
            reasons.append(f"M(e) is not positive definite (min eigenvalue {mpmath.nstr(min_eig, 5)})")
        divis = _divisibility(pencil, g, hf, reasons)
        return det_residual, gamma, hf, min_eig, divis


def _divisibility(pencil: LinearPencil, g, h, reasons) -> dict:
    """Cofactor (1,1) by g and the first-row cofactors by h; only meaningful in the construction frame."""
    out = {}
    if g is None:
        return out
    P = pencil.precision
    first = [cofactor_form(pencil, 0, l) for l in range(pencil.size)]
    gg = g if (g.exact and pencil.exact) else (g.to_float(P or DEFAULT_PRECISION) if g.exact else g)
    _, r = divide(first[0], gg)
    out["M11/g"] = r
    if r > DIV_TOL:
        reasons.append(f"cofactor (1,1) is not divisible by g (residual {_fmt(r)})")
    if h is not None and h.degree > 0:
        hh = h if (h.exact and pencil.exact) else (h.to_float(P or DEFAULT_PRECISION) if h.exact else h)
        for l, c in enumerate(first):
            if c.is_zero():
                out[f"M1{l + 1}/h"] = 0
                continue
            _, r = divide(c, hh)
            out[f"M1{l + 1}/h"] = r
            if r > DIV_TOL:
                reasons.append(f"cofactor (1,{l + 1}) is not divisible by h (residual {_fmt(r)})")
    return out


def _fmt(v) -> str:
    return str(v) if isinstance(v, Fraction) else mpmath.nstr(to_mpf(v), 5)
