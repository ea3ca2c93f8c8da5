"""Search for a conic touching both ovals of a hyperbolic quartic in real points.

For a direction ``l`` in the affine chart, the two supporting lines ``l_1, l_2``
of the inner oval touch it at ``p_1, p_2``.  With ``g`` the chord through
``p_1, p_2``, every conic ``q = g^2 - lam l_1 l_2`` is tangent to the inner oval
at both points.  Growing ``lam`` until the conic reaches the outer oval gives a
critical value on each side of the chord; where the two values coincide (found
by a sign change over the directions, then root bracketing) the conic touches
the outer oval on both sides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import InputError, NumericalError
from .fastnum import eval_form
from .forms import TernaryForm


class ConicSearchError(NumericalError):
    pass


@dataclass
class ConicSearchResult:
    success: bool
    conic: TernaryForm | None = None
    theta: float | None = None
    lam: float | None = None
    inner_contacts: list = field(default_factory=list)
    outer_contacts: list = field(default_factory=list)
    tangency_residuals: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    reason: str = ""

    def __bool__(self):
        return self.success

    def to_json(self) -> dict:
        from .forms import format_form

        return {
            "success": self.success,
            "conic": format_form(self.conic) if self.conic is not None else None,
            "theta": self.theta,
            "lambda": self.lam,
            "inner_contacts": [list(map(float, p)) for p in self.inner_contacts],
            "outer_contacts": [list(map(float, p)) for p in self.outer_contacts],
            "tangency_residuals": [float(r) for r in self.tangency_residuals],
            "trace": [[float(c) for c in row] for row in self.trace],
            "reason": self.reason,
        }


def _line_coeffs(F: TernaryForm, base: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Coefficients (highest first) of ``s -> F(base + s direction)`` for each row."""
    d = F.degree
    nodes = np.cos(np.pi * (np.arange(d + 1) + 0.5) / (d + 1))
    vals = np.stack([eval_form(F, base + t * direction) for t in nodes], axis=1)
    V = np.vander(nodes, d + 1)
    return np.linalg.solve(V, vals.T).T


def _positive_real_roots(coeffs: np.ndarray) -> list[float]:
    r = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(r)))) if len(r) else 1.0
    real = sorted(float(x.real) for x in r if abs(x.imag) <= 1e-7 * scale and x.real > 0)
    return real


def _missing_line(F: TernaryForm, e: np.ndarray, rng: np.random.Generator, tries: int = 4000):
    """A real line avoiding V(F) and e, with the largest margin found."""
    best, best_margin = None, 0.0
    phis = np.linspace(0, 2 * np.pi, 257)[:-1]
    for _ in range(tries):
        n = rng.standard_normal(3)
        n /= np.linalg.norm(n)
        if abs(n @ e) < 1e-3 * np.linalg.norm(e):
            continue
        u = np.cross(n, [1.0, 0, 0] if abs(n[0]) < 0.9 else [0, 1.0, 0])
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        pts = np.cos(phis)[:, None] * u + np.sin(phis)[:, None] * v
        vals = eval_form(F, pts)
        if np.all(vals > 0) or np.all(vals < 0):
            margin = float(np.min(np.abs(vals)) / np.max(np.abs(vals)))
            if margin > best_margin:
                best, best_margin = (u, v), margin
                if margin > 0.2:
                    break
    return best


def _chart(F: TernaryForm, e: np.ndarray, seed: int) -> np.ndarray:
    """Columns ``(u, v, e)``: new coordinates with e at the origin of an affine chart
    whose line at infinity misses the real curve."""
    phis = np.linspace(0, 2 * np.pi, 513)[:-1]
    zline = np.stack([np.cos(phis), np.sin(phis), np.zeros_like(phis)], axis=1)
    vals = eval_form(F, zline)
    if abs(e[2]) > 1e-12 and (np.all(vals > 0) or np.all(vals < 0)):
        return np.array([[1.0, 0, 0], [0, 1.0, 0], e]).T
    found = _missing_line(F, e, np.random.default_rng(seed))
    if found is None:
        raise InputError("no real line avoiding the curve was found")
    u, v = found
    return np.array([u, v, e]).T


class _AffineQuartic:
    """The quartic in the affine chart Z = 1 with e at the origin."""

    def __init__(self, F: TernaryForm):
        self.F = F
        self.Fx, self.Fy = F.partial(0), F.partial(1)
        self.Fxx, self.Fxy, self.Fyy = self.Fx.partial(0), self.Fx.partial(1), self.Fy.partial(1)

    def _pts(self, P: np.ndarray) -> np.ndarray:
        P = np.atleast_2d(P)
        return np.column_stack([P, np.ones(len(P))])

    def value(self, P):
        return eval_form(self.F, self._pts(P))

    def ray_roots(self, base: np.ndarray, direction: np.ndarray) -> list[float]:
        b = np.append(base, 1.0)[None, :]
        dvec = np.append(direction, 0.0)[None, :]
        return _positive_real_roots(_line_coeffs(self.F, b, dvec)[0])

    def support_point(self, theta: float, guess: np.ndarray) -> np.ndarray:
        """Point of the inner oval where ``cos(theta) X + sin(theta) Y`` is extremal."""
        c, s = math.cos(theta), math.sin(theta)
        p = np.array(guess, dtype=float)
        for _ in range(60):
            pt = self._pts(p)
            fx, fy = eval_form(self.Fx, pt)[0], eval_form(self.Fy, pt)[0]
            fxx, fxy, fyy = (eval_form(h, pt)[0] for h in (self.Fxx, self.Fxy, self.Fyy))
            r = np.array([self.value(p)[0], fx * s - fy * c])
            J = np.array([[fx, fy], [fxx * s - fxy * c, fxy * s - fyy * c]])
            step = np.linalg.solve(J, r)
            p = p - step
            if np.linalg.norm(step) <= 1e-15 * max(1.0, np.linalg.norm(p)):
                break
        return p


@dataclass
class _SideData:
    lam: float
    contact: np.ndarray


def _critical_lambda(q: _AffineQuartic, p1, p2, w, kappa, width, sign) -> _SideData:
    """Smallest ``lam`` at which the conic reaches the outer oval on one side of the chord."""

    def crit(u):
        base = p2 + u * (p1 - p2)
        roots = q.ray_roots(base, sign * w)
        if len(roots) < 2:
            return math.inf
        s_out = roots[1]
        return (s_out * kappa / width) ** 2 / (u * (1 - u))

    grid = 0.5 - 0.5 * np.cos(np.pi * (np.arange(1, 120) / 120))
    vals = np.array([crit(u) for u in grid])
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(crit, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    u = float(res.x) if res.fun <= vals[k] else float(grid[k])
    lam = min(float(res.fun), float(vals[k]))
    base = p2 + u * (p1 - p2)
    s_out = q.ray_roots(base, sign * w)[1]
    return _SideData(lam, base + sign * s_out * w)


def real_contact_conic_search(f: TernaryForm, e: Sequence, angles: int = 36, seed: int = 0,
                              tol: float = 1e-10) -> ConicSearchResult:
    """Conic tangent to the inner oval at two points and touching the outer oval on both sides."""
    if f.degree != 4:
        raise InputError("the conic search needs a quartic")
    from .hyperbolic import HyperbolicityError, is_hyperbolic

    if not is_hyperbolic(f, e, n=60, seed=seed).hyperbolic:
        raise HyperbolicityError("f is not hyperbolic with respect to e")
    ev = np.array([float(c) for c in e])
    Ff = f.to_float(53) if f.exact else f
    if float(eval_form(Ff, ev[None, :])[0]) < 0:
        Ff = -Ff
    T = _chart(Ff, ev, seed)
    F = Ff.transform(T.tolist())
    F = F / F.max_abs()
    q = _AffineQuartic(F)

    phis = np.linspace(0, 2 * np.pi, 721)[:-1]
    inner = []
    for phi in phis:
        dirn = np.array([math.cos(phi), math.sin(phi)])
        roots = q.ray_roots(np.zeros(2), dirn)
        if len(roots) < 2:
            raise InputError("the curve does not have two nested ovals around e")
        inner.append(roots[0] * dirn)
    inner = np.array(inner)

    def chord(theta):
        c, s = math.cos(theta), math.sin(theta)
        lvals = inner @ np.array([c, s])
        p1 = q.support_point(theta, inner[int(np.argmax(lvals))])
        p2 = q.support_point(theta, inner[int(np.argmin(lvals))])
        return p1, p2, np.array([-s, c])

    def sides(theta):
        p1, p2, w = chord(theta)
        c, s = math.cos(theta), math.sin(theta)
        width = (p1 - p2) @ np.array([c, s])
        d = p2 - p1
        kappa = d[0] * w[1] - d[1] * w[0]
        sgn = 1.0 if kappa > 0 else -1.0
        one = _critical_lambda(q, p1, p2, w, abs(kappa), width, sgn)
        two = _critical_lambda(q, p1, p2, w, abs(kappa), width, -sgn)
        return one, two, (p1, p2, w, width)

    def delta(theta):
        one, two, _ = sides(theta)
        return one.lam - two.lam

    thetas = np.linspace(0, math.pi, angles + 1)
    trace = []
    vals = []
    for th in thetas:
        one, two, _ = sides(th)
        trace.append((th, one.lam, two.lam))
        vals.append(one.lam - two.lam)
    root = None
    for k in range(len(thetas)):
        if vals[k] == 0:
            root = thetas[k]
            break
        if k + 1 < len(thetas) and vals[k] * vals[k + 1] < 0:
            root = brentq(delta, thetas[k], thetas[k + 1], xtol=1e-13)
            break
    if root is None:
        return ConicSearchResult(False, trace=trace, reason="no sign change of lambda_1 - lambda_2")
    one, two, (p1, p2, w, width) = sides(root)
    lam = 0.5 * (one.lam + two.lam)
    if abs(one.lam - two.lam) > tol * max(1.0, abs(lam)):
        return ConicSearchResult(False, trace=trace, reason="bisection did not converge")

    c, s = math.cos(root), math.sin(root)
    c1, c2 = float(p1 @ np.array([c, s])), float(p2 @ np.array([c, s]))
    d = [float(t) for t in p2 - p1]
    q1 = [float(t) for t in p1]
    P = F.precision
    X, Y, Z = (TernaryForm.variable(i, P) for i in range(3))
    # chord g(P) = cross(p2 - p1, P - p1), scaled as in the critical-value computation
    g = (Y * d[0] - X * d[1] + Z * (d[1] * q1[0] - d[0] * q1[1]))
    l1 = Z * c1 - X * c - Y * s
    l2 = X * c + Y * s - Z * c2
    conic_local = g * g - l1 * l2 * lam
    Tinv = np.linalg.inv(T)
    conic = conic_local.transform(Tinv.tolist())
    conic = conic / conic.max_abs()
    if float(eval_form(conic, ev[None, :])[0]) < 0:
        conic = -conic

    def back(p):
        v = T @ np.append(p, 1.0)
        return v / np.linalg.norm(v)

    residuals = []
    for p in (p1, p2):
        base = np.append(p, 1.0)[None, :]
        coeffs = _line_coeffs(F, base, np.append(w, 0.0)[None, :])[0]
        scale = np.max(np.abs(coeffs))
        residuals.append(max(abs(coeffs[-1]), abs(coeffs[-2])) / scale)
    return ConicSearchResult(
        True, conic, float(root), float(lam),
        [back(p1), back(p2)], [back(one.contact), back(two.contact)], residuals, trace)
