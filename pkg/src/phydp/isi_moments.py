"""Sinc coefficient sums and moments of the ISI variable.

With a timing offset ``tau`` and sinc pulses, one received sample carries

    I = sum_{t != 0} a_t * sinc(t - tau),    a_t = +1 w.p. p, -1 otherwise.

Two independent routes to the distribution of ``I`` live here:

* closed forms: :func:`pulse_coeff_sum` gives ``G(n, tau) = sum_{t!=0}
  sinc(t - tau)^n`` through Hurwitz zeta values, and :func:`central_moments`
  applies the product formula ``mu_n = G(n, tau) 2^n [p(1-p)^n + (1-p)(-p)^n]``;
* exact enumeration: :func:`enumerate_isi` lists all ``2^(2L)`` sign patterns
  of the ``L`` nearest neighbours per side and shifts them by the
  deterministic mean of the truncated tail.

The product formula is exact for orders up to 3. From order 4 on it drops
the cross terms of the independent summands, so the enumeration moments
differ from it; both are exposed so the gap can be measured.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .specfn import alt_hurwitz_zeta, hurwitz_zeta, sinc

__all__ = [
    "IsiConfig",
    "MomentTable",
    "IsiDistribution",
    "MAX_WINDOW",
    "MAX_ORACLE_ORDER",
    "pulse_coeff",
    "pulse_coeff_sum",
    "window_coeffs",
    "tail_coeff_sum",
    "central_moments",
    "raw_moments",
    "enumerate_isi",
    "isi_atoms",
    "enumeration_moments",
]

MAX_WINDOW = 14
MAX_ORACLE_ORDER = 12
_MERGE_QUANTUM = 1e-12
_ZETA_OVERFLOW_LOG = 650.0


@dataclass(frozen=True)
class IsiConfig:
    """Timing offset, source bias and enumeration limits.

    Parameters
    ----------
    tau : float
        Timing offset in symbol periods, in [0, 1].
    p : float
        Probability that a symbol is +1.
    window : int
        Neighbours per side enumerated exactly (1..14).
    max_order : int
        Highest moment order to tabulate.
    """

    tau: float
    p: float = 0.5
    window: int = 10
    max_order: int = 4

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window!r}")
        if self.max_order < 1:
            raise ValueError(f"max_order must be >= 1, got {self.max_order!r}")


@dataclass
class MomentTable:
    """Central and raw moments of ``I`` up to ``order``."""

    mean: float
    central: list
    raw: list = field(default_factory=list)
    source: str = "formula"

    @property
    def order(self):
        return len(self.central) - 1

    def to_dict(self):
        return {
            "source": self.source,
            "order": self.order,
            "mean": self.mean,
            "central": list(self.central),
            "raw": list(self.raw),
        }


@dataclass
class IsiDistribution:
    """Finite-window distribution of ``I``.

    ``values`` already include ``tail_mean_shift``; the random part of the
    truncated tail is not represented and ``tail_std_bound`` bounds its
    standard deviation.
    """

    values: np.ndarray
    masses: np.ndarray
    tail_mean_shift: float
    tail_std_bound: float
    tail_variance: float = 0.0

    @property
    def atoms(self):
        return list(zip(self.values.tolist(), self.masses.tolist()))


def pulse_coeff(t_index, tau):
    """ISI weight ``sinc(t - tau)`` of the neighbour ``t`` symbols away."""
    if t_index == 0 or int(t_index) != t_index:
        raise ValueError(f"t_index must be a nonzero integer, got {t_index!r}")
    return sinc(t_index - tau)


def pulse_coeff_sum(n, tau):
    """``G(n, tau) = sum_{t != 0} sinc(t - tau)^n`` in closed form.

    Uses ``1 - sinc(tau)`` for ``n = 1``, the Hurwitz zeta pair for even
    ``n`` and the alternating pair for odd ``n``. At ``tau = 0`` all weights
    vanish; at ``tau = 1`` only the ``t = 1`` weight survives and equals 1.
    """
    if n < 1 or int(n) != n:
        raise ValueError(f"order n must be a positive integer, got {n!r}")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau!r}")
    n = int(n)
    if tau == 0.0:
        return 0.0
    if tau == 1.0:
        return 1.0
    g = sinc(tau)
    if n == 1:
        return 1.0 - g
    if n * -math.log(1.0 - tau) > _ZETA_OVERFLOW_LOG:
        # zeta terms overflow; weights beyond |t| = 64 add < 2 (63 pi)^-n
        return math.fsum(window_coeffs(tau, 64) ** n)
    # The t = 0 terms of zeta(n, +-tau) are +-tau^-n; peeling them off
    # cancels the "- 2" exactly and avoids losing digits at small tau.
    gt = g * tau
    if n % 2 == 0:
        inner = hurwitz_zeta(n, 1.0 + tau) + hurwitz_zeta(n, 1.0 - tau)
    else:
        inner = alt_hurwitz_zeta(n, 1.0 - tau) - alt_hurwitz_zeta(n, 1.0 + tau)
    return gt**n * inner


def window_coeffs(tau, window):
    """Weights ``sinc(t - tau)`` for ``t = -L..-1, 1..L`` as an array."""
    ts = [t for t in range(-window, window + 1) if t != 0]
    return np.array([sinc(t - tau) for t in ts])


def tail_coeff_sum(n, tau, window):
    """``G(n, tau)`` minus its ``0 < |t| <= window`` part."""
    c = window_coeffs(tau, window)
    return pulse_coeff_sum(n, tau) - math.fsum(c**n)


def _bracket(n, p):
    # E[(a - (2p - 1))^n] / 2^n for a = +-1
    return p * (1.0 - p) ** n + (1.0 - p) * (-p) ** n


def central_moments(cfg):
    """Closed-form moment table for ``I`` (``source = "formula"``).

    ``mu_0`` is fixed to 1 since ``G(0, tau)`` diverges; ``mu_1`` comes
    out of the formula as 0.
    """
    mean = (2.0 * cfg.p - 1.0) * pulse_coeff_sum(1, cfg.tau)
    central = [1.0]
    for n in range(1, cfg.max_order + 1):
        central.append(pulse_coeff_sum(n, cfg.tau) * 2.0**n * _bracket(n, cfg.p))
    return raw_moments(MomentTable(mean=mean, central=central, source="formula"))


def raw_moments(table):
    """Fill ``table.raw`` by the binomial change of origin and return it."""
    mu = table.mean
    raw = []
    for n in range(table.order + 1):
        raw.append(math.fsum(math.comb(n, j) * table.central[j] * mu ** (n - j)
                             for j in range(n + 1)))
    table.raw = raw
    return table


@lru_cache(maxsize=16)
def _sign_patterns(tau, window):
    # ISI values of every sign pattern and the number of +1 signs in each
    coeffs = [c for c in window_coeffs(tau, window) if c != 0.0]
    values = np.zeros(1)
    plus = np.zeros(1, dtype=np.int16)
    for c in coeffs:
        values = np.concatenate((values + c, values - c))
        plus = np.concatenate((plus + 1, plus))
    values.flags.writeable = False
    plus.flags.writeable = False
    return values, plus, len(coeffs)


def isi_atoms(cfg, merge=False):
    """Unmerged (or merged) ISI atoms with the tail corrections applied.

    Raises
    ------
    MemoryError
        If ``cfg.window`` exceeds 14.
    """
    if cfg.window > MAX_WINDOW:
        raise MemoryError(f"window {cfg.window} exceeds the enumeration limit {MAX_WINDOW}")
    p = cfg.p
    coeffs = window_coeffs(cfg.tau, cfg.window)
    g1_tail = pulse_coeff_sum(1, cfg.tau) - math.fsum(coeffs)
    g2_tail = max(pulse_coeff_sum(2, cfg.tau) - math.fsum(coeffs**2), 0.0)
    shift = (2.0 * p - 1.0) * g1_tail

    values, plus, n = _sign_patterns(float(cfg.tau), int(cfg.window))
    if p in (0.0, 1.0):
        live = plus == (n if p == 1.0 else 0)
        values, masses = values[live], np.ones(1)
    else:
        k = np.arange(n + 1)
        table = np.exp(k * math.log(p) + (n - k) * math.log1p(-p))
        masses = table[plus]
    if merge:
        values, masses = _merge(values, masses)
    return IsiDistribution(
        values=values + shift,
        masses=masses,
        tail_mean_shift=shift,
        tail_std_bound=2.0 * math.sqrt(g2_tail),
        tail_variance=4.0 * p * (1.0 - p) * g2_tail,
    )


def enumerate_isi(cfg):
    """Exact distribution of the windowed ISI sum, plus tail corrections.

    All ``2^(2L)`` sign patterns of the ``L`` neighbours per side are
    listed, atoms closer than 1e-12 are merged, and every value is shifted
    by the mean of the neglected tail ``(2p - 1) * sum_{|t|>L} sinc(t - tau)``.
    ``tail_std_bound = 2 sqrt(sum_{|t|>L} sinc(t - tau)^2)``.

    Raises
    ------
    MemoryError
        If ``cfg.window`` exceeds 14.
    """
    return isi_atoms(cfg, merge=True)


def _merge(values, masses):
    keys = np.round(values / _MERGE_QUANTUM).astype(np.int64)
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    merged = np.zeros(uniq.size)
    np.add.at(merged, inverse, masses)
    return values[first], merged


def enumeration_moments(dist, order):
    """Exact moments of the discrete distribution (``source = "enumeration"``)."""
    if order > MAX_ORACLE_ORDER:
        raise ValueError(f"order {order} exceeds the oracle limit {MAX_ORACLE_ORDER}")
    v, m = dist.values, dist.masses
    mean = float(np.dot(m, v))
    d = v - mean
    central = [1.0, 0.0]
    raw = [1.0, mean]
    dk = d.copy()
    vk = v.copy()
    for _ in range(2, order + 1):
        dk = dk * d
        vk = vk * v
        central.append(float(np.dot(m, dk)))
        raw.append(float(np.dot(m, vk)))
    return MomentTable(mean=mean, central=central[: order + 1], raw=raw[: order + 1],
                       source="enumeration")
