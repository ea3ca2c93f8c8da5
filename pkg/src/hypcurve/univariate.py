"""Real roots, interlacing and univariate Bezout matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .forms import DEFAULT_PRECISION, UnivariatePoly, to_fraction, to_mpf
from .errors import InputError, PrecisionExhausted
from .linalg import exact_inertia, exact_rank


@dataclass(frozen=True)
class RealRoot:
    lo: object
    hi: object
    multiplicity: int
    value: object = field(compare=False, default=None)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi


class RealRootList(list):
    """Sorted isolated real roots; each entry is a :class:`RealRoot`."""

    def values(self) -> list:
        return [r.value for r in self]

    def with_multiplicity(self) -> list:
        out = []
        for r in self:
            out.extend([r.value] * r.multiplicity)
        return out

    def count(self) -> int:  # type: ignore[override]
        return sum(r.multiplicity for r in self)


# ---------------------------------------------------------------- exact roots


def sturm_sequence(p: UnivariatePoly) -> list[UnivariatePoly]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        r = seq[-2] % seq[-1]
        if r.is_zero():
            break
        seq.append(-r)
    return seq


def _sign_changes(seq, t) -> int:
    signs = [s for s in (_sgn(q(t)) for q in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sgn(v) -> int:
    return (v > 0) - (v < 0)


def cauchy_bound(p: UnivariatePoly) -> Fraction:
    lc = abs(p.leading)
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=Fraction(0))


def _isolate_squarefree(p: UnivariatePoly) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (lo, hi], each holding one root of squarefree p."""
    seq = sturm_sequence(p)
    B = cauchy_bound(p)
    out = []
    stack = [(-B, B, _sign_changes(seq, -B), _sign_changes(seq, B))]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        n = vlo - vhi
        if n == 0:
            continue
        if n == 1:
            out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        k = 3
        while p(mid) == 0:  # keep split points off the roots
            mid = lo + (hi - lo) * Fraction(k, 2 * k + 1)
            k += 1
        vmid = _sign_changes(seq, mid)
        stack.append((lo, mid, vlo, vmid))
        stack.append((mid, hi, vmid, vhi))
    return sorted(out)


def _refine(p: UnivariatePoly, lo: Fraction, hi: Fraction, width: Fraction):
    """Shrink an isolating interval (lo, hi] of a simple root of p."""
    if p(hi) == 0:
        return hi, hi
    slo = _sgn(p(lo))
    while hi - lo > width:
        mid = (lo + hi) / 2
        v = p(mid)
        if v == 0:
            return mid, mid
        if _sgn(v) == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _exact_common_roots(polys: Sequence[UnivariatePoly], width=Fraction(1, 2 ** 140)):
    """Distinct real roots of the product of ``polys`` with per-poly multiplicities.

    With ``width=None`` the isolating intervals are not refined (enough for
    counting and ordering).
    """
    factors = []  # (squarefree factor, poly index, multiplicity)
    for idx, p in enumerate(polys):
        for fac, mult in p.squarefree_decomposition():
            factors.append((fac, idx, mult))
    radical = UnivariatePoly([1])
    for fac, _, _ in factors:
        radical = radical * fac
        radical = radical // radical.gcd(radical.derivative())
    if radical.degree < 1:
        return []
    out = []
    for lo, hi in _isolate_squarefree(radical):
        if width is not None:
            lo, hi = _refine(radical, lo, hi, width)
        mults = [0] * len(polys)
        for fac, idx, mult in factors:
            if lo == hi:
                hit = fac(lo) == 0
            else:
                hit = fac(hi) == 0 or _sgn(fac(lo)) != _sgn(fac(hi))
            if hit:
                mults[idx] += mult
        with mpmath.workprec(DEFAULT_PRECISION):
            value = (to_mpf(lo) + to_mpf(hi)) / 2
        out.append((lo, hi, mults, value))
    return out


# ---------------------------------------------------------------- float roots


def cluster_tolerance(precision: int) -> mpmath.mpf:
    return mpmath.mpf(2) ** (-(2 * precision) // 5)


def ambiguity_tolerance(precision: int) -> mpmath.mpf:
    return mpmath.mpf(2) ** (-(precision * 27) // 100)


def complex_roots(p: UnivariatePoly, precision: int | None = None) -> list:
    """All complex roots of p (numerically, via mpmath.polyroots)."""
    prec = precision or p.precision or DEFAULT_PRECISION
    with mpmath.workprec(prec):
        cs = [to_mpf(c) for c in reversed(p.coeffs)]
        if len(cs) <= 1:
            return []
        if len(cs) == 2:
            return [-cs[1] / cs[0]]
        roots = mpmath.polyroots(cs, maxsteps=400, extraprec=2 * prec, cleanup=True)
        return list(roots)


def _float_real_roots(p: UnivariatePoly, precision: int):
    roots = complex_roots(p, precision)
    with mpmath.workprec(precision):
        scale = max([mpmath.mpf(1)] + [abs(r) for r in roots])
        tol = cluster_tolerance(precision) * scale
        amb = ambiguity_tolerance(precision) * scale
        reals = []
        for r in roots:
            im = abs(mpmath.im(r))
            if im <= tol:
                reals.append(mpmath.re(r))
            elif im <= amb:
                raise PrecisionExhausted("root with tiny imaginary part; retry at higher precision")
        reals.sort()
        clusters: list[list] = []
        for r in reals:
            if clusters and r - clusters[-1][-1] <= tol:
                clusters[-1].append(r)
            else:
                clusters.append([r])
        for a, b in zip(clusters, clusters[1:]):
            if b[0] - a[-1] <= amb:
                raise PrecisionExhausted("root clusters too close; retry at higher precision")
        return [(mpmath.fsum(c) / len(c), len(c)) for c in clusters]


# ---------------------------------------------------------------- public API


def isolate_real_roots(p: UnivariatePoly) -> RealRootList:
    """All real roots of ``p`` with multiplicities.

    Exact mode uses Sturm sequences on the squarefree factors (intervals with
    rational endpoints); float mode clusters companion-matrix roots.
    """
    if p.is_zero():
        raise InputError("the zero polynomial has no isolated roots")
    if p.exact:
        return RealRootList(
            RealRoot(lo, hi, mults[0], value) for lo, hi, mults, value in _exact_common_roots([p])
        )
    return RealRootList(
        RealRoot(v, v, m, v) for v, m in _float_real_roots(p, p.precision)
    )


def count_real_roots(p: UnivariatePoly) -> int:
    """Number of real roots with multiplicity."""
    if not p.exact:
        return isolate_real_roots(p).count()
    total = 0
    for fac, mult in p.squarefree_decomposition():
        seq = sturm_sequence(fac)
        lo = [_sgn(q.leading) * (-1) ** q.degree for q in seq]
        hi = [_sgn(q.leading) for q in seq]
        changes = [sum(1 for a, b in zip(s, s[1:]) if a != b) for s in (lo, hi)]
        total += mult * (changes[0] - changes[1])
    return total


def count_roots_above(p: UnivariatePoly, a) -> int:
    """Distinct real roots of an exact polynomial in the open ray (a, oo)."""
    total = 0
    for fac, _ in p.squarefree_decomposition():
        seq = sturm_sequence(fac)
        hi = [_sgn(q.leading) for q in seq]
        inf_changes = sum(1 for x, y in zip(hi, hi[1:]) if x != y)
        total += _sign_changes(seq, a) - inf_changes
    return total


def is_real_rooted(p: UnivariatePoly) -> bool:
    return count_real_roots(p) == p.degree


def interlaces(p: UnivariatePoly, q: UnivariatePoly, strict: bool = False) -> bool:
    """Whether the roots of q interlace those of p (deg q = deg p - 1)."""
    if q.degree != p.degree - 1:
        raise InputError("interlacing needs deg q = deg p - 1")
    d = p.degree
    if p.exact and q.exact:
        merged = _exact_common_roots([p, q], width=None)
        if sum(m[0] for _, _, m, _ in merged) != d or sum(m[1] for _, _, m, _ in merged) != d - 1:
            return False
        # rank of each root in the merged order decides comparisons exactly
        alphas, betas = [], []
        for rank, (_, _, mults, _) in enumerate(merged):
            alphas += [rank] * mults[0]
            betas += [rank] * mults[1]
        gap = 1 if strict else 0
        return all(alphas[i] + gap <= betas[i] <= alphas[i + 1] - gap for i in range(d - 1))
    prec = max(p.precision or 0, q.precision or 0) or DEFAULT_PRECISION
    pr = _float_real_roots(p.to_float(prec) if p.exact else p, prec)
    qr = _float_real_roots(q.to_float(prec) if q.exact else q, prec)
    alphas = [v for v, m in pr for _ in range(m)]
    betas = [v for v, m in qr for _ in range(m)]
    if len(alphas) != d or len(betas) != d - 1:
        return False
    with mpmath.workprec(prec):
        spread = max(alphas[-1] - alphas[0], mpmath.mpf(1)) if alphas else mpmath.mpf(1)
        tol = cluster_tolerance(prec) * spread
        if strict:
            gap = mpmath.mpf("1e-12") * spread
            return all(alphas[i] + gap < betas[i] < alphas[i + 1] - gap for i in range(d - 1))
        return all(alphas[i] - tol <= betas[i] <= alphas[i + 1] + tol for i in range(d - 1))


@dataclass
class BezoutMatrixU:
    entries: list[list]
    precision: int | None = None

    @property
    def size(self) -> int:
        return len(self.entries)

    def is_psd(self, tol=None) -> bool:
        if self.precision is None:
            _, neg, _ = exact_inertia(self.entries)
            return neg == 0
        with mpmath.workprec(self.precision):
            E = mpmath.eigsy(mpmath.matrix(self.entries), eigvals_only=True)
            vals = [E[i] for i in range(len(E))]
            scale = max([abs(v) for v in vals] + [mpmath.mpf(1)])
            tol = cluster_tolerance(self.precision) if tol is None else tol
            return min(vals) >= -tol * scale

    def rank(self, tol=None) -> int:
        if self.precision is None:
            return exact_rank(self.entries)
        with mpmath.workprec(self.precision):
            S = mpmath.svd_r(mpmath.matrix(self.entries), compute_uv=False)
            vals = [S[i] for i in range(len(S))]
            tol = cluster_tolerance(self.precision) if tol is None else tol
            top = max(vals + [mpmath.mpf(0)])
            return sum(1 for s in vals if s > tol * top)


def bezout_coefficients(p: Sequence, q: Sequence, d: int) -> list[list]:
    """Coefficients h_ij of (p(s)q(t) - p(t)q(s))/(s - t) = sum h_ij s^i t^j.

    ``p``, ``q`` are ascending coefficient sequences of any scalar type
    supporting ring operations (numbers or forms); the result is d x d.
    """
    zero = 0 * p[0] if len(p) else 0

    def pc(i):
        return p[i] if 0 <= i < len(p) else zero

    def qc(i):
        return q[i] if 0 <= i < len(q) else zero

    def c(a, b):
        return pc(a) * qc(b) - pc(b) * qc(a)

    h = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            acc = zero
            for k in range(j + 1):
                acc = acc + c(i + 1 + k, j - k)
            h[i][j] = h[j][i] = acc
    return h


def bezout_uni(p: UnivariatePoly, q: UnivariatePoly) -> BezoutMatrixU:
    """Bezout matrix of p (degree d) and q (degree < d), indexed from s^0 t^0."""
    if q.degree > p.degree - 1:
        raise InputError("bezout_uni needs deg q <= deg p - 1")
    prec = p.precision if p.precision is not None else q.precision
    if (p.precision is None) != (q.precision is None):
        from .forms import ScalarModeError

        raise ScalarModeError("mixed scalar modes")
    with mpmath.workprec(prec or 53):
        h = bezout_coefficients(list(p.coeffs) or [0], list(q.coeffs), p.degree)
    return BezoutMatrixU(h, prec)
