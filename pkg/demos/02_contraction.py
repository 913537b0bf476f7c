"""
Relative entropy contracts under a stochastic transition
========================================================

Push two distributions through a transition matrix and their KL divergence
shrinks by at least 1 - gamma. Conditioning on a response shrinks it on
average. These scripts check both on random instances.
"""

import numpy as np

from bkmonitor import contraction_decompose, kl_divergence, mixing_rate, verify_fact1, verify_theorem3
from bkmonitor.contraction import random_stochastic, sweep_fact1, sweep_theorem3, sweep_theorem45
from bkmonitor.metrics import random_distribution

rng = np.random.default_rng(1)
q = random_stochastic(rng, 4, 3)
phi, psi = random_distribution(rng, 4), random_distribution(rng, 4)

lhs, rhs, ok = verify_theorem3(q, phi, psi)
print(f"D before {kl_divergence(phi, psi):.4f}, after {lhs:.4f}, bound {rhs:.4f} (gamma={mixing_rate(q):.3f})")

# %%
# The mass two rows share can be split off as an anterior-independent part.
d = contraction_decompose([[0.9, 0.1], [0.1, 0.9]], 0.2)
print("Q_gamma =\n", d.q_gamma, "\nQ_delta =\n", d.q_delta)

# %%
# Conditioning: the expected posterior divergence never exceeds the prior one.
o = random_stochastic(rng, 4, 2)
print(verify_fact1(o, phi, psi))

# %%
# Randomized sweeps, as run by ``bkmonitor verify``.
for res in (sweep_theorem3(1000, 7), sweep_fact1(1000, 7),
            sweep_theorem45(500, 7), sweep_theorem45(500, 7, coupled=True)):
    print(res)
