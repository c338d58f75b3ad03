"""Which impairment costs less reliability for the same privacy?

For each budget the rotation angle and timing offset are calibrated, and
the BER each one pays is compared.

Run with ``python demos/privacy_tradeoff.py``.
"""

from phydp import (
    ChannelNoise,
    InfeasibleTarget,
    IsiConfig,
    alpha_for_epsilon,
    isi_privacy,
    rotation_ber,
    tau_for_epsilon,
)

noise = ChannelNoise(1.0)
for p in (0.5, 0.9):
    print(f"P(+1) = {p}")
    print("epsilon  rotation BER  ISI BER")
    for target in (1.4, 1.2, 1.0, 0.8):
        rot = rotation_ber(alpha_for_epsilon(target, noise), noise)
        try:
            tau = tau_for_epsilon(target, p, noise)
            isi = f"{isi_privacy(IsiConfig(tau, p), noise).ber:.6f}"
        except InfeasibleTarget:
            isi = "unreachable"
        print(f"{target:<8} {rot:.6f}      {isi}")
    print()

# With an unbiased source both impairments keep the two crossovers equal,
# so both land on BER = 1 / (1 + e^eps). A biased source skews the ISI
# crossovers and the prior-weighted BER moves off that curve.
