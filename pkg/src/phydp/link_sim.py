"""Monte Carlo simulation of the sampled BPSK receiver.

Each received sample is the real part of

    y = a e^{j alpha} sinc(tau) + sum_{0<|t|<=L} a_t sinc(t - tau) + n,

detected by ``sign(Re y)`` with ties going to +1. Rotation runs have
``tau = 0``; ISI runs have ``alpha = 0`` and draw the neighbours ``a_t``
from one long symbol stream, so consecutive samples share neighbours as
they would on a real link.

Random numbers come from Philox, a counter-based generator. The stream is
cut into fixed chunks of 65536 samples and chunk ``c`` draws its symbols
from key ``(seed, 2c)`` and its noise from key ``(seed, 2c + 1)``. Results
therefore do not depend on the number of workers, and a run of ``m``
symbols is an exact prefix of any longer run with the same seed.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import signal

from .isi_moments import IsiConfig
from .mechanisms import ChannelNoise
from .specfn import sinc

__all__ = ["SimConfig", "SimReport", "simulate", "convergence_sweep", "MECHANISMS"]

MECHANISMS = ("snr", "rotation", "isi")
CHUNK = 1 << 16
MAX_SIM_WINDOW = 4000
_BOOTSTRAP_STREAM = 1 << 62
_BOOTSTRAP_REPS = 400
_BOOTSTRAP_MAX_BLOCKS = 10_000


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo run.

    Only the fields of the selected mechanism are read: ``alpha`` for
    ``"rotation"``, ``isi`` and ``window`` for ``"isi"``.
    """

    mechanism: str
    noise: ChannelNoise = ChannelNoise(1.0)
    num_symbols: int = 10**6
    seed: int = 0
    alpha: float = 0.0
    isi: Optional[IsiConfig] = None
    window: int = 2000
    workers: int = 1

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"mechanism must be one of {MECHANISMS}, got {self.mechanism!r}")
        if self.num_symbols < 1000:
            raise ValueError("num_symbols must be >= 1000")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.mechanism == "rotation" and not 0.0 <= self.alpha <= math.pi / 2:
            raise ValueError(f"alpha must lie in [0, pi/2], got {self.alpha!r}")
        if self.mechanism == "isi":
            if self.isi is None:
                raise ValueError("isi mechanism needs an IsiConfig")
            if not 1 <= self.window <= MAX_SIM_WINDOW:
                raise ValueError(f"simulation window must lie in [1, {MAX_SIM_WINDOW}]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def p(self):
        return self.isi.p if self.mechanism == "isi" else 0.5

    @property
    def span(self):
        return self.window if self.mechanism == "isi" else 0


@dataclass(frozen=True)
class SimReport:
    zeta1_hat: float
    zeta1_se: float
    zeta2_hat: float
    zeta2_se: float
    ber_hat: float
    ber_se: float
    epsilon_hat: float
    epsilon_se: float
    n_minus_sent: int
    n_plus_sent: int
    errors_minus: int
    errors_plus: int
    num_symbols: int
    seed: int
    params: dict = field(default_factory=dict)

    def to_dict(self):
        out = dict(self.params)
        out.update({
            "zeta1_hat": self.zeta1_hat,
            "zeta1_se": self.zeta1_se,
            "zeta2_hat": self.zeta2_hat,
            "zeta2_se": self.zeta2_se,
            "ber_hat": self.ber_hat,
            "ber_se": self.ber_se,
            "epsilon_hat": self.epsilon_hat,
            "epsilon_se": self.epsilon_se,
            "counts": {
                "n_minus_sent": self.n_minus_sent,
                "n_plus_sent": self.n_plus_sent,
                "errors_minus": self.errors_minus,
                "errors_plus": self.errors_plus,
            },
            "num_symbols": self.num_symbols,
            "seed": self.seed,
        })
        return out


def _rng(seed, stream_id):
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(stream_id) << 64)))


def _symbols(cfg, first_chunk, count):
    # `count` consecutive symbol chunks starting at `first_chunk`, as +-1.0
    parts = [_rng(cfg.seed, 2 * k).random(CHUNK) < cfg.p
             for k in range(first_chunk, first_chunk + count)]
    return np.where(np.concatenate(parts), 1.0, -1.0)


def _isi_kernel(cfg):
    L, tau = cfg.window, cfg.isi.tau
    # kernel[j] weights the symbol L - j positions ahead of the centre
    return np.array([sinc(L - j - tau) for j in range(2 * L + 1)])


def _run_chunk(cfg, c, kernel):
    span = cfg.span
    need = 1 + -(-2 * span // CHUNK) if span else 1
    stream = _symbols(cfg, c, need)
    noise = cfg.noise.sigma * _rng(cfg.seed, 2 * c + 1).standard_normal(CHUNK)
    if cfg.mechanism == "isi":
        window = stream[: CHUNK + 2 * span]
        received = signal.fftconvolve(window, kernel, mode="valid") + noise
        sent = window[span: span + CHUNK]
    else:
        sent = stream[:CHUNK]
        gain = math.cos(cfg.alpha) if cfg.mechanism == "rotation" else 1.0
        received = gain * sent + noise
    sent_plus = sent > 0
    decided_plus = received >= 0.0
    return sent_plus, sent_plus != decided_plus


def _run(cfg, n):
    n_chunks = -(-n // CHUNK)
    kernel = _isi_kernel(cfg) if cfg.mechanism == "isi" else None
    if cfg.workers == 1:
        parts = [_run_chunk(cfg, c, kernel) for c in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(lambda c: _run_chunk(cfg, c, kernel), range(n_chunks)))
    sent_plus = np.concatenate([s for s, _ in parts])[:n]
    error = np.concatenate([e for _, e in parts])[:n]
    return sent_plus, error


def _binomial_se(k, n):
    if n == 0:
        return math.nan
    q = k / n
    return math.sqrt(q * (1.0 - q) / n)


def _block_bootstrap_se(cfg, sent_plus, error, block):
    # standard errors of (zeta1, zeta2, ber) by resampling whole blocks
    nb = sent_plus.size // block
    if nb < 2:
        return None
    m = nb * block
    sp = sent_plus[:m].reshape(nb, block)
    er = error[:m].reshape(nb, block)
    n_plus = sp.sum(axis=1)
    n_minus = block - n_plus
    e_plus = (er & sp).sum(axis=1)
    e_minus = (er & ~sp).sum(axis=1)
    idx = _rng(cfg.seed, _BOOTSTRAP_STREAM).integers(0, nb, size=(_BOOTSTRAP_REPS, nb))
    with np.errstate(invalid="ignore", divide="ignore"):
        z1 = e_minus[idx].sum(axis=1) / n_minus[idx].sum(axis=1)
        z2 = e_plus[idx].sum(axis=1) / n_plus[idx].sum(axis=1)
        ber = (e_plus + e_minus)[idx].sum(axis=1) / (nb * block)
    return tuple(float(np.std(x, ddof=1)) for x in (z1, z2, ber))


def _epsilon_with_se(z1, s1, z2, s2):
    lo, hi = (z1, z2) if z1 <= z2 else (z2, z1)
    s_lo, s_hi = (s1, s2) if z1 <= z2 else (s2, s1)
    if lo <= 0.0 or hi >= 1.0:
        return math.inf, math.inf
    eps = math.log1p(-hi) - math.log(lo)
    se = math.hypot(s_lo / lo, s_hi / (1.0 - hi))
    return eps, se


def _report(cfg, sent_plus, error):
    n = sent_plus.size
    n_plus = int(sent_plus.sum())
    n_minus = n - n_plus
    e_plus = int((error & sent_plus).sum())
    e_minus = int((error & ~sent_plus).sum())
    z1 = e_minus / n_minus if n_minus else math.nan
    z2 = e_plus / n_plus if n_plus else math.nan
    ber = (e_plus + e_minus) / n
    ses = None
    if cfg.mechanism == "isi":
        # longer blocks than 4 * window only when that would exceed the block cap
        block = max(4 * cfg.window, -(-n // _BOOTSTRAP_MAX_BLOCKS))
        ses = _block_bootstrap_se(cfg, sent_plus, error, block)
    if ses is None:
        ses = (_binomial_se(e_minus, n_minus), _binomial_se(e_plus, n_plus),
               _binomial_se(e_plus + e_minus, n))
    eps, eps_se = _epsilon_with_se(z1, ses[0], z2, ses[1])
    params = {"mechanism": cfg.mechanism, "sigma": cfg.noise.sigma, "p": cfg.p}
    if cfg.mechanism == "rotation":
        params["alpha"] = cfg.alpha
    elif cfg.mechanism == "isi":
        params["tau"] = cfg.isi.tau
        params["window"] = cfg.window
    return SimReport(
        zeta1_hat=z1, zeta1_se=ses[0], zeta2_hat=z2, zeta2_se=ses[1],
        ber_hat=ber, ber_se=ses[2], epsilon_hat=eps, epsilon_se=eps_se,
        n_minus_sent=n_minus, n_plus_sent=n_plus,
        errors_minus=e_minus, errors_plus=e_plus,
        num_symbols=n, seed=cfg.seed, params=params,
    )


def simulate(cfg):
    """Run ``cfg.num_symbols`` detections and summarise them.

    Standard errors are binomial for the memoryless mechanisms and come
    from a block bootstrap (block length ``4 * window``, or longer to keep
    at most 10^4 blocks) for ISI, whose samples are correlated through
    shared neighbours. ``epsilon_hat`` is the DP budget of the empirical
    rates, with a delta-method error.
    """
    sent_plus, error = _run(cfg, cfg.num_symbols)
    return _report(cfg, sent_plus, error)


def convergence_sweep(cfg, sizes):
    """Reports for growing prefixes of one simulated stream."""
    sizes = [int(s) for s in sizes]
    if not sizes or sizes != sorted(sizes) or sizes[0] < 1000:
        raise ValueError("sizes must be ascending and each >= 1000")
    sent_plus, error = _run(cfg, sizes[-1])
    return [_report(cfg, sent_plus[:m], error[:m]) for m in sizes]
