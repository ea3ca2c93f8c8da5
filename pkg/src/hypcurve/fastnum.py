"""Double-precision helpers for bulk sampling (region checks, plotting, conic search)."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .forms import TernaryForm, dir_derivative


def form_arrays(form: TernaryForm) -> tuple[np.ndarray, np.ndarray]:
    exps = np.array(list(form.coeffs.keys()), dtype=float).reshape(-1, 3)
    coeffs = np.array([float(c) for c in form.coeffs.values()])
    return exps, coeffs


def eval_form(form: TernaryForm, pts: np.ndarray) -> np.ndarray:
    """Values of ``form`` at the rows of ``pts``."""
    exps, coeffs = form_arrays(form)
    if len(coeffs) == 0:
        return np.zeros(len(pts))
    mons = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
    return mons @ coeffs


def restriction_coefficients(form: TernaryForm, e: Sequence, pts: np.ndarray) -> np.ndarray:
    """Rows: coefficients (highest degree first) of ``t -> form(a + t e)`` at each point ``a``."""
    d = form.degree
    out = np.zeros((len(pts), d + 1))
    der = form
    for k in range(d + 1):
        out[:, d - k] = eval_form(der, pts) / math.factorial(k)
        if k < d:
            der = dir_derivative(der, e)
    return out


def batched_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of each row polynomial via companion matrices (rows share the degree)."""
    n, d1 = coeffs.shape
    d = d1 - 1
    if d == 0:
        return np.zeros((n, 0), dtype=complex)
    lead = coeffs[:, 0:1]
    comp = np.zeros((n, d, d))
    comp[:, 0, :] = -coeffs[:, 1:] / lead
    if d > 1:
        comp[:, np.arange(1, d), np.arange(0, d - 1)] = 1.0
    return np.linalg.eigvals(comp)
