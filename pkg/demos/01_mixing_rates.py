"""
Mixing rates of flat and factored processes
===========================================

A single binary variable that flips with probability delta mixes at rate
2 delta. Glue N of them together and the flat joint mixes far more slowly,
even though nothing interacts. Per-cluster rates avoid that collapse.
"""

import numpy as np

from bkmonitor import analyze, compound_mixing_bound, corpus, mixing_rate
from bkmonitor.synthetic import flip_process

# one flipping bit
delta = 0.1
print("single flip:", mixing_rate([[1 - delta, delta], [delta, 1 - delta]]))

# the flat joint of N independent flips
for n in (1, 2, 4, 6, 8):
    g = mixing_rate(flip_process(n, delta).transition)
    print(f"N={n}: flat gamma = {g:.5f}   (4 delta)^(N/2) = {(4 * delta) ** (n / 2):.5f}")

# per-cluster analysis sees the 2 delta rate again
print(analyze(flip_process(6, delta)))

# %%
# Interacting clusters pay for their connections: (gamma_min / r) ** q.
m = corpus.load("coupled6")
report = analyze(m)
print(report)
print("flat joint rate:", mixing_rate(m.transition))

# the three clusterings compared for a freeway-traffic network
for gammas, r, q in [((0.00040, 0.0081), 2, 2),
                     ((0.00077, 0.080, 0.0081, 0.96), 3, 2),
                     ((0.0022, 0.020, 0.0034), 3, 3)]:
    print(gammas, r, q, "->", f"{compound_mixing_bound(min(gammas), r, q):.3g}")

# %%
# Rates of random matrices against the Doeblin coefficient sum_j min_i Q[i, j]
from bkmonitor import doeblin_coefficient
from bkmonitor.contraction import random_stochastic

rng = np.random.default_rng(0)
for _ in range(5):
    q = random_stochastic(rng, 4, 4)
    print(f"mixing {mixing_rate(q):.3f}  doeblin {doeblin_coefficient(q):.3f}")
