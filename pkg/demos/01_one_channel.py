"""
One channel, four optimizers
============================

Draw a desk-scale channel and compare random, greedy and exhaustive phases.
"""

import numpy as np

from ris_lab import SystemConfig, exhaustive, greedy, random_phase, realization, secure_sum
from ris_lab.ris import PhaseConfig

cfg = SystemConfig(K=3, M=2, L=6, mu=2, rng_seed=3)
ch = realization(cfg, 0)
print("G", ch.G.shape, "users", ch.h_users.shape, "eve", ch.h_eve.shape)

# all-zero phases as a reference point
print("zero      ", secure_sum(ch, PhaseConfig.zeros(cfg.L, cfg.mu), cfg))

r = random_phase(cfg, ch, trials=10, rng=np.random.default_rng(0))
g = greedy(cfg, ch)
e = exhaustive(cfg, ch)
for name, res in (("random", r), ("greedy", g), ("exhaustive", e)):
    print(f"{name:10s}", res.secure_sum, res.phases.indices)

print("greedy / optimum", g.secure_sum / e.secure_sum)
