"""Shared fixtures: the standard curves and cached pipeline runs."""
from __future__ import annotations

import time

import pytest
from hypothesis import HealthCheck, settings

from hypcurve.dixon import LinearPencil, dixon_pipeline
from hypcurve.forms import TernaryForm, dir_derivative

settings.register_profile(
    "suite", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("suite")

P = TernaryForm.parse

QUADRIC = "x^2-y^2-z^2"
CUBIC = "x^3+2*x^2*y-x*y^2-2*y^3-x*z^2"
CUBIC_G = "x^2-y^2-1/5*z^2"
ELLIPTIC = "x^3-6*x*z^2-3*z^3-y^2*z"
ELLIPTIC_G = "y^2+3*x*z+z^2"
ELLIPTIC_E = (-1, 0, 1)
QUARTIC = ("1250000*x^4-1749500*x^3*y-2250800*x^2*y^2-4312500*x^2*z^2+69260*x*y^3"
           "+786875*x*y*z^2+88176*y^4+1141000*y^2*z^2+1687500*z^4")
QUARTIC_G = "500*x^3-800*x^2*y-740*x*y^2-625*x*z^2+176*y^3+1000*y*z^2"
E1 = (1, 0, 0)

CUBIC_MATRIX = [["5*x+10*y", "-x-2*y", "-4*z", "2*z"],
                ["-x-2*y", "x", "0", "0"],
                ["-4*z", "0", "4*x+2*y", "-2*x-4*y"],
                ["2*z", "0", "-2*x-4*y", "4*x+2*y"]]
ELLIPTIC_MATRIX = [["3*z", "y", "-x-z", "-3*x+z"],
                   ["y", "-x+2*z", "0", "-y"],
                   ["-x-z", "0", "z", "x+4*z"],
                   ["-3*x+z", "-y", "x+4*z", "-x+18*z"]]
QUADRIC_MATRIX = [["x", "-y", "-z"], ["-y", "x", "0"], ["-z", "0", "x"]]


def linear_entry(text: str) -> TernaryForm:
    f = P(text)
    return f if f.degree == 1 else TernaryForm.zero(1)


def pencil_from_strings(rows) -> LinearPencil:
    return LinearPencil.from_forms([[linear_entry(c) for c in row] for row in rows])


@pytest.fixture(scope="session")
def quadric_run():
    return dixon_pipeline(P(QUADRIC), P("x"), E1)


@pytest.fixture(scope="session")
def cubic_run():
    return dixon_pipeline(P(CUBIC), P(CUBIC_G), E1)


@pytest.fixture(scope="session")
def cubic_deriv_run():
    f = P(CUBIC)
    return dixon_pipeline(f, dir_derivative(f, E1), E1)


@pytest.fixture(scope="session")
def quartic_run():
    return dixon_pipeline(P(QUARTIC), P(QUARTIC_G), E1)


@pytest.fixture(scope="session")
def elliptic_run():
    return dixon_pipeline(P(ELLIPTIC), P(ELLIPTIC_G), ELLIPTIC_E)


@pytest.fixture(scope="session")
def elliptic_deriv_run():
    f = P(ELLIPTIC)
    return dixon_pipeline(f, dir_derivative(f, ELLIPTIC_E), ELLIPTIC_E)


# acceptance report ------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []
_SESSION_START = time.perf_counter()
SUITE_BUDGET = 300.0


def report(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - _SESSION_START
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    ok = elapsed < SUITE_BUDGET
    terminalreporter.write_line(
        f"[{'PASS' if ok else 'FAIL'}] criterion 7 (runtime): whole session {elapsed:.1f} s "
        f"(< {SUITE_BUDGET:.0f} s)")
