"""Gram matrices of ternary forms: ``W = m^T G m`` with ``m`` the monomials of half degree."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import least_squares

from .errors import InputError
from .forms import TernaryForm, monomials
from .linalg import exact_nullspace, rref


def _gram_layout(degree: int):
    if degree % 2:
        raise InputError("Gram matrices need an even degree")
    half = monomials(degree // 2)
    pairs = [(i, j) for i in range(len(half)) for j in range(i, len(half))]
    out = {m: k for k, m in enumerate(monomials(degree))}
    return half, pairs, out


def gram_system(W: TernaryForm):
    """Exact affine family ``G0 + sum_k t_k K_k`` of symmetric Gram matrices of ``W``."""
    if not W.exact:
        raise InputError("gram_system needs rational coefficients")
    half, pairs, out = _gram_layout(W.degree)
    n = len(half)
    rows = [[Fraction(0)] * len(pairs) for _ in out]
    for p, (i, j) in enumerate(pairs):
        m = tuple(a + b for a, b in zip(half[i], half[j]))
        rows[out[m]][p] += 1 if i == j else 2
    rhs = [Fraction(W.coefficient(m)) for m in out]
    red, pivots = rref([r + [b] for r, b in zip(rows, rhs)])
    particular = [Fraction(0)] * len(pairs)
    for i, pc in enumerate(pivots):
        particular[pc] = red[i][len(pairs)]

    def unpack(vec):
        G = [[Fraction(0)] * n for _ in range(n)]
        for p, (i, j) in enumerate(pairs):
            G[i][j] = G[j][i] = vec[p]
        return G

    return unpack(particular), [unpack(k) for k in exact_nullspace(rows)]


def gram_form(G, degree: int) -> TernaryForm:
    """``m^T G m`` as a form."""
    half = monomials(degree // 2)
    coeffs: dict = {}
    for i, a in enumerate(half):
        for j, b in enumerate(half):
            m = tuple(x + y for x, y in zip(a, b))
            coeffs[m] = coeffs.get(m, 0) + G[i][j]
    exact = all(isinstance(c, (int, Fraction)) for row in G for c in row)
    if exact:
        return TernaryForm(degree, coeffs)
    return TernaryForm(degree, {m: float(c) for m, c in coeffs.items()}, 53)


@dataclass
class GramFit:
    G: np.ndarray
    U: np.ndarray
    residual: float
    eigenvalues: np.ndarray

    @property
    def psd(self) -> bool:
        return bool(self.eigenvalues[0] >= -1e-12 * abs(self.eigenvalues[-1]))

    def numerical_rank(self, tol: float = 1e-9) -> int:
        top = abs(self.eigenvalues[-1])
        return int(np.sum(self.eigenvalues > tol * top))


def low_rank_gram(W: TernaryForm, rank: int, seed: int = 0, restarts: int = 40,
                  tol: float = 1e-12) -> GramFit:
    """Best fit of ``W`` (scaled to unit max coefficient) by a sum of ``rank`` squares.

    Solves ``W = sum_k (u_k . m)^2`` for the coefficient vectors ``u_k`` by
    nonlinear least squares from seeded starts; ``G = U U^T``.
    """
    half, _, out = _gram_layout(W.degree)
    n = len(half)
    scale = float(W.max_abs())
    target = np.array([float(W.coefficient(m)) for m in out]) / scale
    # P[m, i, j] = 1 when half[i] + half[j] = m
    P = np.zeros((len(out), n, n))
    for i, a in enumerate(half):
        for j, b in enumerate(half):
            P[out[tuple(x + y for x, y in zip(a, b))], i, j] = 1.0

    def resid(flat):
        U = flat.reshape(n, rank)
        return np.einsum("mij,ik,jk->m", P, U, U) - target

    def jac(flat):
        U = flat.reshape(n, rank)
        J = 2 * np.einsum("mij,jk->mik", P, U)
        return J.reshape(len(out), n * rank)

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        x0 = rng.standard_normal(n * rank)
        sol = least_squares(resid, x0, jac=jac, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            method="lm")
        r = float(np.max(np.abs(sol.fun)))
        if best is None or r < best[0]:
            best = (r, sol.x)
        if r <= tol:
            break
    r, x = best
    U = x.reshape(n, rank)
    G = U @ U.T
    return GramFit(G * scale, U * np.sqrt(scale), r, np.linalg.eigvalsh(G))
