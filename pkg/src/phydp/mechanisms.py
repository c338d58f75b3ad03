"""Privacy budgets for BPSK links: reduced SNR, phase rotation and ISI.

Every mechanism ends in a binary-input binary-output channel with
crossover probabilities ``(zeta1, zeta2)`` (errors given -1 and +1 sent),
and its pure-DP budget is

    eps = ln((1 - max(zeta1, zeta2)) / min(zeta1, zeta2)).

Noise convention: ``sigma`` is the standard deviation of the noise along
the real detection axis, so the plain AWGN error rate is ``Q(1 / sigma)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .isi_moments import (
    IsiConfig,
    central_moments,
    enumerate_isi,
    isi_atoms,
    raw_moments,
    MomentTable,
)
from .specfn import (
    gaussian_tail_q,
    gaussian_tail_q_inv,
    log_double_factorial_odd,
    sinc,
)

__all__ = [
    "ChannelNoise",
    "RotationAngle",
    "CrossoverPair",
    "PrivacyResult",
    "InfeasibleTarget",
    "NonConvergence",
    "NonMonotoneBracket",
    "epsilon_from_crossovers",
    "optimal_crossover",
    "snr_ber",
    "epsilon_snr",
    "binary_convolve",
    "bsc_rate_for_target",
    "rotation_ber",
    "epsilon_rotation",
    "alpha_for_epsilon",
    "isi_crossovers_enum",
    "isi_crossovers_series",
    "isi_ber",
    "isi_privacy",
    "tau_for_epsilon",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_TINY = 1e-300
MAX_DEPTH = 200


class InfeasibleTarget(ValueError):
    """The requested privacy budget cannot be reached with this mechanism."""


class NonConvergence(ArithmeticError):
    """A series or iteration failed to settle."""


class NonMonotoneBracket(ArithmeticError):
    """Sampled epsilon is not monotone over the search interval."""


@dataclass(frozen=True)
class ChannelNoise:
    sigma: float = 1.0
    bit_energy: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if self.bit_energy != 1.0:
            raise ValueError("bit_energy is fixed at 1")


@dataclass(frozen=True)
class RotationAngle:
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= math.pi / 2:
            raise ValueError(f"alpha must lie in [0, pi/2], got {self.alpha!r}")


@dataclass(frozen=True)
class CrossoverPair:
    """Detection error probabilities given -1 sent (zeta1) and +1 sent (zeta2).

    ``bound`` is a worst-case absolute error on each entry.
    """

    zeta1: float
    zeta2: float
    method: str = "closed_form"
    bound: float = 0.0

    def __post_init__(self):
        for z in (self.zeta1, self.zeta2):
            if not -self.bound - 1e-15 <= z <= 1.0 + self.bound + 1e-15:
                raise ValueError(f"crossover {z!r} is not a probability")
        if self.bound < 0:
            raise ValueError("bound must be nonnegative")


@dataclass
class PrivacyResult:
    epsilon: float
    ber: float
    crossovers: CrossoverPair
    mechanism: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mechanism": self.mechanism,
            **self.params,
            "zeta1": self.crossovers.zeta1,
            "zeta2": self.crossovers.zeta2,
            "ber": self.ber,
            "epsilon": self.epsilon,
            "method": self.crossovers.method,
            "bound": self.crossovers.bound,
        }


def _noise(noise):
    if isinstance(noise, ChannelNoise):
        return noise
    return ChannelNoise(float(noise))


def _angle(angle):
    if isinstance(angle, RotationAngle):
        return angle.alpha
    return RotationAngle(float(angle)).alpha


def epsilon_from_crossovers(c):
    """Pure-DP budget of the binary channel described by ``c``.

    Returns ``inf`` when the smaller crossover is below 1e-300 and exactly
    0 when the pair sums to 1 within 1e-12.
    """
    lo, hi = min(c.zeta1, c.zeta2), max(c.zeta1, c.zeta2)
    total = c.zeta1 + c.zeta2
    if total > 1.0 + 2.0 * c.bound + 1e-12:
        raise ValueError(f"crossovers sum to {total!r} > 1; outside the binary DP regime")
    if abs(total - 1.0) <= 1e-12:
        return 0.0
    if lo < _TINY:
        return math.inf
    return max(0.0, math.log1p(-hi) - math.log(lo))


def optimal_crossover(epsilon):
    """Crossover of the BSC that is exactly ``epsilon``-DP: ``1 / (1 + e^eps)``."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon > 700:
        return math.exp(-epsilon)
    return 1.0 / (1.0 + math.exp(epsilon))


def snr_ber(noise):
    return gaussian_tail_q(1.0 / _noise(noise).sigma)


def epsilon_snr(noise):
    pe = snr_ber(noise)
    return epsilon_from_crossovers(CrossoverPair(pe, pe))


def binary_convolve(a, b):
    """Crossover of the cascade BSC(a) -> BSC(b)."""
    return a * (1.0 - b) + b * (1.0 - a)


def bsc_rate_for_target(target_eps, noise):
    """Flip rate ``r`` of a pre-modulation BSC giving budget ``target_eps``.

    Solves ``binary_convolve(r, Q(1/sigma)) = 1/(1 + e^target)`` exactly.

    Raises
    ------
    InfeasibleTarget
        If ``target_eps`` exceeds what the channel alone gives; added
        flips can only lower the budget.
    """
    noise = _noise(noise)
    if target_eps < 0:
        raise InfeasibleTarget("target epsilon must be nonnegative")
    base = epsilon_snr(noise)
    if target_eps > base + 1e-12:
        raise InfeasibleTarget(
            f"target epsilon {target_eps:.9g} exceeds the channel's own {base:.9g}")
    pe = snr_ber(noise)
    denom = 1.0 - 2.0 * pe
    if denom <= 0.0:
        return 0.0
    r = (optimal_crossover(target_eps) - pe) / denom
    return min(max(r, 0.0), 0.5)


def rotation_ber(angle, noise):
    """Error rate of a real-axis detector when the constellation is rotated by alpha."""
    alpha = _angle(angle)
    return gaussian_tail_q(math.cos(alpha) / _noise(noise).sigma)


def epsilon_rotation(angle, noise):
    pe = rotation_ber(angle, noise)
    return epsilon_from_crossovers(CrossoverPair(pe, pe))


def alpha_for_epsilon(target_eps, noise):
    """Rotation angle giving budget ``target_eps``.

    ``cos(alpha) = sigma * Qinv(1 / (1 + e^target))``.
    """
    noise = _noise(noise)
    if target_eps < 0:
        raise InfeasibleTarget("target epsilon must be nonnegative")
    q = optimal_crossover(target_eps)
    if q <= 0.0:
        raise InfeasibleTarget(f"target epsilon {target_eps!r} is unreachable")
    c = noise.sigma * gaussian_tail_q_inv(q)
    if c > 1.0 + 1e-12:
        raise InfeasibleTarget(
            f"target epsilon {target_eps:.9g} needs cos(alpha) = {c:.9g} > 1; "
            f"the unrotated link only reaches {epsilon_snr(noise):.9g}")
    return RotationAngle(math.acos(min(max(c, 0.0), 1.0)))


def isi_crossovers_enum(cfg, noise, tail="gaussian"):
    """ISI crossovers averaged over the enumerated ISI distribution.

    Parameters
    ----------
    cfg : IsiConfig
    noise : ChannelNoise or float
    tail : {"gaussian", "ignore"}
        How the random part of the truncated tail (beyond ``cfg.window``)
        enters. ``"ignore"`` drops it, ``"gaussian"`` adds its variance to
        the noise. Either way the result is within ``bound`` of the
        infinite-window value.

    Returns
    -------
    CrossoverPair
        ``method="enumeration"``, ``bound = tail_std_bound / (sigma sqrt(2 pi))``.
    """
    noise = _noise(noise)
    dist = isi_atoms(cfg)
    g = sinc(cfg.tau)
    if tail == "gaussian":
        s = math.sqrt(noise.sigma**2 + dist.tail_variance)
    elif tail == "ignore":
        s = noise.sigma
    else:
        raise ValueError(f"unknown tail mode {tail!r}")
    # Q(x) = ndtr(-x)
    z1 = float(np.sum(dist.masses * special.ndtr((dist.values - g) / s)))
    z2 = float(np.sum(dist.masses * special.ndtr((dist.values + g) / -s)))
    bound = dist.tail_std_bound / (noise.sigma * _SQRT_2PI)
    return CrossoverPair(min(max(z1, 0.0), 1.0), min(max(z2, 0.0), 1.0),
                         method="enumeration", bound=bound)


def _oracle_moment_table(cfg, order):
    # exact moments of the enumerated distribution to any order
    dist = enumerate_isi(cfg)
    v, m = dist.values, dist.masses
    mean = float(np.dot(m, v))
    d = v - mean
    central = [1.0, 0.0]
    dk = d.copy()
    for _ in range(2, order + 1):
        dk = dk * d
        central.append(float(np.dot(m, dk)))
    return raw_moments(MomentTable(mean=mean, central=central[: order + 1],
                                   source="enumeration"))


def isi_crossovers_series(cfg, noise, depth=80, moments="formula"):
    """ISI crossovers from the Taylor expansion of ``Q`` against ISI moments.

    Each expectation is

        1/2 - 1/(sqrt(2 pi) sigma) sum_{n<=depth} sum_{k=0}^{2n+1} sum_{j=0}^{k}
            (2n-1)!! g^(2n+1-k) s_nk mu_j mu^(k-j) / (sigma^(2n) (2n+1-k)! j! (k-j)!)

    with ``s_nk = (-1)^(n+k)`` for ``zeta1`` and ``(-1)^n`` for ``zeta2``,
    ``mu_j`` the central moments and ``mu`` the mean of ``I``.

    Parameters
    ----------
    moments : {"formula", "oracle"}
        ``"formula"`` uses the closed-form product moments; ``"oracle"``
        uses exact moments of the enumerated distribution instead.

    Raises
    ------
    NonConvergence
        If outer blocks grow for 10 consecutive indices or overflow.
    """
    noise = _noise(noise)
    if not 1 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must lie in [1, {MAX_DEPTH}], got {depth!r}")
    sigma = noise.sigma
    kmax = 2 * depth + 1
    mcfg = IsiConfig(cfg.tau, cfg.p, cfg.window, kmax)
    if moments == "formula":
        table = central_moments(mcfg)
    elif moments == "oracle":
        table = _oracle_moment_table(mcfg, kmax)
    else:
        raise ValueError(f"unknown moment source {moments!r}")
    mu = table.mean
    # mix[k] = sum_j mu_j mu^(k-j) / (j! (k-j)!), the k-th raw moment over k!
    inv_fact = [math.exp(-math.lgamma(i + 1)) for i in range(kmax + 1)]
    mix = [math.fsum(table.central[j] * inv_fact[j] * mu ** (k - j) * inv_fact[k - j]
                     for j in range(k + 1))
           for k in range(kmax + 1)]
    g = sinc(cfg.tau)
    log_sigma = math.log(sigma)

    terms1, terms2 = [], []
    last = math.inf
    prev_mag = None
    growth = 0
    for n in range(depth + 1):
        log_c = log_double_factorial_odd(n) - 2 * n * log_sigma
        b1, b2 = [], []
        for k in range(2 * n + 2):
            if mix[k] == 0.0:
                continue
            e = 2 * n + 1 - k
            gp = g**e
            if gp == 0.0:
                continue
            mag = math.exp(log_c - math.lgamma(e + 1)) * gp * mix[k]
            b2.append(-mag if n % 2 else mag)
            b1.append(b2[-1] if k % 2 == 0 else -b2[-1])
        s1, s2 = math.fsum(b1), math.fsum(b2)
        if not (math.isfinite(s1) and math.isfinite(s2)):
            raise NonConvergence(f"series overflowed at outer index {n}")
        terms1.extend(b1)
        terms2.extend(b2)
        block = max(abs(s1), abs(s2))
        if prev_mag is not None and block > prev_mag:
            growth += 1
            if growth >= 10:
                raise NonConvergence(
                    f"outer blocks grew for 10 consecutive indices up to n = {n} "
                    f"(sigma = {sigma:g} is too small for this expansion)")
        else:
            growth = 0
        prev_mag = block
        last = block
    scale = 1.0 / (_SQRT_2PI * sigma)
    z1 = 0.5 - scale * math.fsum(terms1)
    z2 = 0.5 - scale * math.fsum(terms2)
    bound = scale * last
    return CrossoverPair(min(max(z1, 0.0), 1.0), min(max(z2, 0.0), 1.0),
                         method="series", bound=bound)


def isi_ber(c, p):
    """Prior-weighted error rate ``p zeta2 + (1 - p) zeta1``."""
    return p * c.zeta2 + (1.0 - p) * c.zeta1


def isi_privacy(cfg, noise, method="enumeration", depth=80, tail="gaussian"):
    """Crossovers, BER and epsilon of the ISI mechanism as a :class:`PrivacyResult`."""
    noise = _noise(noise)
    if method == "enumeration":
        c = isi_crossovers_enum(cfg, noise, tail=tail)
    elif method == "series":
        c = isi_crossovers_series(cfg, noise, depth=depth)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PrivacyResult(
        epsilon=epsilon_from_crossovers(c),
        ber=isi_ber(c, cfg.p),
        crossovers=c,
        mechanism="isi",
        params={"tau": cfg.tau, "p": cfg.p, "sigma": noise.sigma},
    )


def _isi_eps(tau, p, noise, window):
    c = isi_crossovers_enum(IsiConfig(tau, p, window), noise)
    return epsilon_from_crossovers(c)


def tau_for_epsilon(target_eps, p, noise, window=10, grid=11, tol=1e-8):
    """Smallest timing offset whose ISI budget equals ``target_eps``.

    A coarse grid over [0, 1] is checked for monotone decrease first, then
    the bracketing cell is refined with Brent's method.

    Raises
    ------
    InfeasibleTarget
        If ``target_eps`` is negative or above the budget at ``tau = 0``.
    NonMonotoneBracket
        If the sampled budgets are not nonincreasing in ``tau``.
    """
    noise = _noise(noise)
    taus = np.linspace(0.0, 1.0, grid)
    eps = [_isi_eps(float(t), p, noise, window) for t in taus]
    if target_eps < 0 or target_eps > eps[0] + tol:
        raise InfeasibleTarget(
            f"target epsilon {target_eps:.9g} outside [0, {eps[0]:.9g}] reachable by ISI")
    if any(b > a + tol for a, b in zip(eps, eps[1:])):
        raise NonMonotoneBracket(
            f"epsilon is not monotone in tau for p={p}, sigma={noise.sigma}: {eps}")
    if abs(eps[0] - target_eps) <= tol:
        return 0.0
    for i in range(1, len(taus)):
        if abs(eps[i] - target_eps) <= tol:
            return float(taus[i])
        if eps[i] < target_eps:
            lo, hi = float(taus[i - 1]), float(taus[i])
            break
    else:
        return 1.0
    f = lambda t: _isi_eps(t, p, noise, window) - target_eps  # noqa: E731
    root, info = optimize.brentq(f, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps,
                                 maxiter=200, full_output=True)
    if not info.converged or abs(f(root)) > tol:
        raise NonConvergence(f"tau search stalled at {root!r}")
    return float(root)
