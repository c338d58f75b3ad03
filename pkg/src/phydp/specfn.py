"""Scalar special functions used by the BER and ISI formulas.

Everything here is pure Python on floats. The Hurwitz zeta routines accept
a shift in (-1, 0) as well as the usual positive shift, because the sinc
coefficient sums need ``zeta(n, -tau)`` for ``tau`` in (0, 1).
"""

import math
from dataclasses import dataclass
from statistics import NormalDist

__all__ = [
    "Tolerance",
    "ZetaArg",
    "DEFAULT_TOL",
    "sinc",
    "gaussian_tail_q",
    "gaussian_tail_q_inv",
    "hurwitz_zeta",
    "alt_hurwitz_zeta",
    "double_factorial_odd",
    "log_double_factorial_odd",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_STD_NORMAL = NormalDist()

# Euler-Maclaurin switchover index and Bernoulli numbers B_2, B_4, B_6, B_8.
_EM_SWITCH = 64
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)


@dataclass(frozen=True)
class Tolerance:
    """Accuracy target for series evaluations."""

    abs_tol: float = 1e-12
    max_terms: int = 10**6

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class ZetaArg:
    """Integer order ``s >= 2`` and real shift ``q`` with ``q > -1``, ``q != 0``."""

    order: int
    shift: float

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ValueError(f"zeta order must be an integer >= 2, got {self.order!r}")
        if not math.isfinite(self.shift) or self.shift <= -1.0 or self.shift == 0.0:
            raise ValueError(f"zeta shift must lie in (-1, 0) U (0, inf), got {self.shift!r}")


def sinc(x):
    """Normalized sinc, ``sin(pi x) / (pi x)``.

    The sine is evaluated on the reduced argument ``x - round(x)`` so that
    every nonzero integer gives an exact zero.
    """
    if x == 0.0:
        return 1.0
    k = round(x)
    r = x - k
    if r == 0.0:
        return 0.0
    s = math.sin(math.pi * r)
    if k % 2:
        s = -s
    return s / (math.pi * x)


def gaussian_tail_q(x):
    """Standard normal upper tail probability ``Q(x)``."""
    return 0.5 * math.erfc(x / _SQRT2)


def gaussian_tail_q_inv(pr):
    """Inverse of :func:`gaussian_tail_q` on (0, 1).

    Starts from the rational approximation behind ``statistics.NormalDist``
    and polishes with Newton steps on ``Q`` itself.
    """
    if not 0.0 < pr < 1.0:
        raise ValueError(f"probability must lie strictly inside (0, 1), got {pr!r}")
    x = -_STD_NORMAL.inv_cdf(pr)
    for _ in range(4):
        dens = _INV_SQRT_2PI * math.exp(-0.5 * x * x)
        if dens == 0.0:
            break
        step = (gaussian_tail_q(x) - pr) / dens
        x += step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return x


def _as_zeta_arg(order, shift):
    if isinstance(order, ZetaArg):
        return order
    return ZetaArg(int(order), float(shift))


def hurwitz_zeta(order, shift=None, tol=DEFAULT_TOL):
    """Hurwitz zeta ``sum_{t>=0} (t + q)^(-s)`` for integer ``s >= 2``.

    Parameters
    ----------
    order : int or ZetaArg
        Exponent ``s``; a :class:`ZetaArg` may be passed instead of the pair.
    shift : float
        Shift ``q``. For ``q`` in (-1, 0) only the ``t = 0`` term has a
        negative base and it keeps the sign of the integer power.
    tol : Tolerance
        Only the term budget is consulted; the fixed Euler-Maclaurin tail
        (switchover 64, four Bernoulli corrections) is accurate to well
        below 1e-12 for every order >= 2.

    Returns
    -------
    float
    """
    arg = _as_zeta_arg(order, shift)
    s, q = arg.order, arg.shift
    n_direct = min(_EM_SWITCH, tol.max_terms)
    head = math.fsum((t + q) ** -s for t in range(n_direct))
    a = n_direct + q
    tail = a ** (1 - s) / (s - 1) + 0.5 * a ** -s
    # rising factorial s (s+1) ... (s+2k-2) times a^(-s-2k+1) / (2k)!
    rising = float(s)
    power = a ** (-s - 1)
    fact = 2.0
    for k, b2k in enumerate(_BERNOULLI, start=1):
        tail += b2k / fact * rising * power
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= a * a
        fact *= (2 * k + 1) * (2 * k + 2)
    return head + tail


def _cvz_alternating(terms):
    """Sum ``sum_k (-1)^k terms[k]`` by Cohen-Villegas-Zagier averaging.

    ``terms`` must be a completely monotone sequence (true for
    ``(k + q)^(-s)`` with ``q > 0``); error is about ``5.8^-n``.
    """
    n = len(terms)
    d = (3.0 + math.sqrt(8.0)) ** n
    d = 0.5 * (d + 1.0 / d)
    b = -1.0
    c = -d
    acc = 0.0
    for k in range(n):
        c = b - c
        acc += c * terms[k]
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1))
    return acc / d


def alt_hurwitz_zeta(order, shift=None, tol=DEFAULT_TOL):
    """Alternating Hurwitz zeta ``sum_{t>=0} (-1)^t (t + q)^(-s)``.

    The series is summed with a weighted average of its partial sums
    (Cohen-Villegas-Zagier), so 40 terms reach double precision. A
    negative shift peels off the ``t = 0`` term and sums the rest from
    shift ``q + 1``.
    """
    arg = _as_zeta_arg(order, shift)
    s, q = arg.order, arg.shift
    n_terms = max(1, min(40, tol.max_terms))
    if q < 0.0:
        rest = _cvz_alternating([(k + 1.0 + q) ** -s for k in range(n_terms)])
        return q ** -s - rest
    return _cvz_alternating([(k + q) ** -s for k in range(n_terms)])


def double_factorial_odd(n):
    """``(2n - 1)!!`` as an exact integer, with ``(-1)!! = 1``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = 1
    for k in range(3, 2 * n, 2):
        out *= k
    return out


def log_double_factorial_odd(n):
    """Natural log of ``(2n - 1)!! = (2n)! / (2^n n!)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.lgamma(2 * n + 1) - n * math.log(2.0) - math.lgamma(n + 1)
