"""Checking the analytic budgets against a simulated link.

Each run draws symbols, applies the impairment and noise, and counts
detection errors. Results are reproducible from the seed for any number
of workers.

Run with ``python demos/monte_carlo.py``.
"""

import math

from phydp import (
    ChannelNoise,
    IsiConfig,
    SimConfig,
    convergence_sweep,
    epsilon_rotation,
    isi_privacy,
    simulate,
)

noise = ChannelNoise(1.0)

alpha = math.pi / 4
r = simulate(SimConfig("rotation", noise, 10**6, seed=1, alpha=alpha, workers=4))
print(f"rotation pi/4: simulated eps {r.epsilon_hat:.4f} +- {r.epsilon_se:.4f}, "
      f"analytic {epsilon_rotation(alpha, noise):.4f}")

cfg = IsiConfig(0.3, 0.5)
exact = isi_privacy(cfg, noise).epsilon
print(f"\nISI tau=0.3, analytic eps {exact:.4f}")
print("symbols    eps_hat   se")
for rep in convergence_sweep(SimConfig("isi", noise, 10**6, seed=7, isi=cfg), [10**4, 10**5, 10**6]):
    print(f"{rep.num_symbols:<10} {rep.epsilon_hat:.4f}    {rep.epsilon_se:.4f}")
