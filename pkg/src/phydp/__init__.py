"""Differential privacy from physical-layer impairments of a BPSK link.

The privacy mechanisms are added channel noise, a fixed constellation
rotation and a fixed timing offset whose sinc pulses leak neighbouring
symbols into each sample. Closed forms live next to exact enumeration and
Monte Carlo oracles that check them.
"""

from .isi_moments import (
    IsiConfig,
    IsiDistribution,
    MomentTable,
    central_moments,
    enumerate_isi,
    enumeration_moments,
    pulse_coeff,
    pulse_coeff_sum,
    raw_moments,
)
from .link_sim import SimConfig, SimReport, convergence_sweep, simulate
from .mechanisms import (
    ChannelNoise,
    CrossoverPair,
    InfeasibleTarget,
    NonConvergence,
    NonMonotoneBracket,
    PrivacyResult,
    RotationAngle,
    alpha_for_epsilon,
    binary_convolve,
    bsc_rate_for_target,
    epsilon_from_crossovers,
    epsilon_rotation,
    epsilon_snr,
    isi_ber,
    isi_crossovers_enum,
    isi_crossovers_series,
    isi_privacy,
    optimal_crossover,
    rotation_ber,
    snr_ber,
    tau_for_epsilon,
)
from .specfn import (
    Tolerance,
    ZetaArg,
    alt_hurwitz_zeta,
    double_factorial_odd,
    gaussian_tail_q,
    gaussian_tail_q_inv,
    hurwitz_zeta,
    sinc,
)

__version__ = "0.1.0"
