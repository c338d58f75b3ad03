"""How much privacy a BPSK link leaks with noise alone, and with a rotation.

Run with ``python demos/rotation_and_noise.py``.
"""

import math

from phydp import (
    ChannelNoise,
    alpha_for_epsilon,
    bsc_rate_for_target,
    epsilon_rotation,
    epsilon_snr,
    rotation_ber,
    snr_ber,
)

# Noise alone: the detector flips a bit with probability Q(1/sigma), and the
# budget is the log-ratio of correct to wrong detections.
print("sigma   BER          epsilon")
for sigma in (0.5, 1.0, 2.0):
    noise = ChannelNoise(sigma)
    print(f"{sigma:<7} {snr_ber(noise):.6e} {epsilon_snr(noise):.6f}")

# At sigma = 1 the link is not private enough for eps = 1. A binary
# symmetric flip in front of the channel would close the gap.
noise = ChannelNoise(1.0)
print(f"\nextra flip rate for eps = 1: {bsc_rate_for_target(1.0, noise):.6f}")

# A fixed rotation shrinks the in-phase projection to cos(alpha), which
# trades BER for privacy. At pi/2 the detector is a coin toss.
print("\nalpha/pi  BER       epsilon")
for frac in (0.0, 0.125, 0.25, 1 / 3, 0.4, 0.5):
    a = frac * math.pi
    print(f"{frac:<9.4f} {rotation_ber(a, noise):.6f}  {epsilon_rotation(a, noise):.6f}")

# The inverse problem: which angle meets a target budget?
for target in (1.0, 0.5, 0.1):
    a = alpha_for_epsilon(target, noise).alpha
    print(f"eps = {target}: alpha = {a:.6f} rad, BER = {rotation_ber(a, noise):.6f}")
