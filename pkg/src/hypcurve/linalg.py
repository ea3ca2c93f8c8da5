"""Small dense linear algebra kernels over Q (Fractions) and mpmath floats."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import mpmath


from .errors import PrecisionExhausted


# ---------------------------------------------------------------- exact


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (matrix, pivot columns)."""
    m = [[Fraction(c) for c in r] for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fac = m[i][c]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def exact_nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right nullspace over Q."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    m, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fcol]
        basis.append(v)
    return basis


def exact_solve(rows: Sequence[Sequence], rhs: Sequence):
    """A particular solution of A x = b over Q, or None if inconsistent."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    ncols = len(rows[0])
    m, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, pc in enumerate(pivots):
        x[pc] = m[i][ncols]
    return x


def exact_det(rows: Sequence[Sequence]) -> Fraction:
    m = [[Fraction(c) for c in r] for r in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                fac = m[i][c] * inv
                m[i] = [a - fac * b for a, b in zip(m[i], m[c])]
    return det


def exact_inertia(rows: Sequence[Sequence]) -> tuple[int, int, int]:
    """(positive, negative, zero) eigenvalue counts of a rational symmetric matrix.

    Symmetric Gaussian elimination with diagonal pivoting; a zero diagonal with
    a nonzero off-diagonal entry is resolved with a 2x2 congruence.
    """
    m = [[Fraction(c) for c in r] for r in rows]
    pos = neg = 0
    n = len(m)
    active = list(range(n))
    while active:
        piv = next((i for i in active if m[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and m[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # replace row/col i by i + j: diagonal becomes 2 m_ij != 0
            for k in range(n):
                m[i][k] += m[j][k]
            for k in range(n):
                m[k][i] += m[k][j]
            piv = i
        d = m[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for i in active:
            if m[i][piv] != 0:
                fac = m[i][piv] / d
                for k in active:
                    m[i][k] -= fac * m[piv][k]
        for i in active:
            m[i][piv] = m[piv][i] = Fraction(0)
    return pos, neg, n - pos - neg


def exact_is_pd(rows) -> bool:
    p, _, _ = exact_inertia(rows)
    return p == len(rows)


def exact_is_psd(rows) -> bool:
    _, n, _ = exact_inertia(rows)
    return n == 0


def exact_rank(rows) -> int:
    return len(rref(rows)[1]) if rows else 0


# ---------------------------------------------------------------- mpmath


def to_mp_matrix(rows) -> mpmath.matrix:
    from .forms import to_mpf

    return mpmath.matrix([[to_mpf(c) for c in r] for r in rows])


def default_rtol() -> mpmath.mpf:
    """Relative singular-value cutoff: half the working digits."""
    return mpmath.mpf(2) ** (-(mpmath.mp.prec * 2) // 5)


class PseudoInverse:
    """SVD-based minimum-norm least-squares solver for a fixed matrix."""

    def __init__(self, A: mpmath.matrix, rtol=None):
        self.rows, self.cols = A.rows, A.cols
        U, S, V = mpmath.svd_r(A, full_matrices=True)
        rtol = default_rtol() if rtol is None else rtol
        smax = max(S) if len(S) else 0
        self.rank = sum(1 for s in S if s > rtol * smax)
        self.U, self.S, self.V = U, S, V
        self.singular_values = [S[i] for i in range(len(S))]

    def solve(self, b: mpmath.matrix) -> mpmath.matrix:
        x = mpmath.matrix(self.cols, 1)
        for k in range(self.rank):
            coef = mpmath.fsum(self.U[i, k] * b[i] for i in range(self.rows)) / self.S[k]
            for j in range(self.cols):
                x[j] += coef * self.V[k, j]
        return x

    def nullspace(self) -> list[list]:
        return [[self.V[k, j] for j in range(self.cols)] for k in range(self.rank, self.cols)]


def mp_nullspace(A: mpmath.matrix, rtol=None) -> list[list]:
    return PseudoInverse(A, rtol).nullspace()


def mp_lstsq(A: mpmath.matrix, b: mpmath.matrix, rtol=None):
    """Minimum-norm least squares solution and the residual norm."""
    x = PseudoInverse(A, rtol).solve(b)
    r = A * x - b
    return x, mpmath.norm(r)


def mp_orthonormalize(vectors: list[list]) -> list[list]:
    """Modified Gram-Schmidt; drops numerically dependent vectors."""
    out: list[list] = []
    for v in vectors:
        w = [mpmath.mpf(c) for c in v]
        for _ in range(2):
            for u in out:
                dot = mpmath.fsum(a * b for a, b in zip(u, w))
                w = [a - dot * b for a, b in zip(w, u)]
        n = mpmath.sqrt(mpmath.fsum(a * a for a in w))
        if n > default_rtol():
            out.append([a / n for a in w])
    return out


def mp_min_eig(rows) -> mpmath.mpf:
    E = mpmath.eigsy(to_mp_matrix(rows), eigvals_only=True)
    return min(E[i] for i in range(len(E)))


class LeastSquares:
    """Householder QR of a fixed tall matrix, reused across right-hand sides.

    Raises :class:`PrecisionExhausted` when the matrix is numerically rank
    deficient (ratio of extreme diagonal entries of R below ``rtol``).
    """

    def __init__(self, A: mpmath.matrix, rtol=None):
        if A.rows < A.cols:
            raise ValueError("least squares needs at least as many rows as columns")
        self.A = A
        self.Q, self.R = mpmath.qr(A, mode="skinny")
        diag = [abs(self.R[i, i]) for i in range(A.cols)]
        rtol = default_rtol() if rtol is None else rtol
        if diag and min(diag) <= rtol * max(diag):
            raise PrecisionExhausted("least-squares matrix is numerically rank deficient")

    def solve(self, b) -> mpmath.matrix:
        n = self.A.cols
        if not isinstance(b, mpmath.matrix):
            b = mpmath.matrix(b)
        qb = [mpmath.fsum(self.Q[i, k] * b[i] for i in range(self.A.rows)) for k in range(n)]
        x = [mpmath.mpf(0)] * n
        for i in range(n - 1, -1, -1):
            acc = qb[i] - mpmath.fsum(self.R[i, j] * x[j] for j in range(i + 1, n))
            x[i] = acc / self.R[i, i]
        return mpmath.matrix(x)

    def residual(self, x, b):
        """Relative residual ``|A x - b| / |b|`` (absolute when b = 0)."""
        if not isinstance(b, mpmath.matrix):
            b = mpmath.matrix(b)
        r = mpmath.norm(self.A * x - b)
        nb = mpmath.norm(b)
        return r / nb if nb else r
