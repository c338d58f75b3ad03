"""Shared oracles and the acceptance summary hook."""

import math
import time

import mpmath
import numpy as np
import pytest

_SESSION_START = time.perf_counter()
ACCEPTANCE = {}


def quad_tail(x, dps=30):
    """Normal upper tail by adaptive quadrature in extended precision."""
    with mpmath.workdps(dps):
        val = mpmath.quad(lambda t: mpmath.exp(-t * t / 2), [x, mpmath.inf])
        return float(val / mpmath.sqrt(2 * mpmath.pi))


def direct_coeff_sum(n, tau, terms):
    """sum_{0<|t|<=terms} sinc(t - tau)^n by brute force."""
    t = np.arange(1, terms + 1, dtype=float)
    right = np.sinc(t - tau) ** n
    left = np.sinc(-t - tau) ** n
    return math.fsum(right) + math.fsum(left)


def coeff_tail_bound(n, tau, terms):
    """Bound on sum_{|t|>terms} |sinc(t - tau)|^n for tau in [0, 1]."""
    # |sinc(t - tau)| <= 1 / (pi (|t| - 1)) and the integral test
    return 2.0 / (math.pi**n * (n - 1) * (terms - 1) ** (n - 1))


@pytest.fixture
def acceptance():
    """Record one pass/fail line for the acceptance summary."""

    def record(key, title, ok, detail):
        ACCEPTANCE[key] = (title, bool(ok), detail)
        print(f"[{'PASS' if ok else 'FAIL'}] {key} {title}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[key]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {key} {title}: {detail}")
    elapsed = time.perf_counter() - _SESSION_START
    tr.write_line(f"[{'PASS' if elapsed < 60 else 'FAIL'}] 10b suite runtime: "
                  f"{elapsed:.1f} s (limit 60 s)")
