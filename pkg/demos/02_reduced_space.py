"""
Reduced action space
====================

Frequency analysis of greedy answers keeps the two most common phase
indices per element, then DQN trains inside that space.
"""

import numpy as np

from ris_lab import SystemConfig, build_reduced, exhaustive, realization, secure_sum
from ris_lab.dqn import TrainSpec, optimize
from ris_lab.streams import stream

cfg = SystemConfig(K=3, M=2, L=8, mu=2, rng_seed=1)
space = build_reduced(cfg, runs=20, n_l=2, rng=stream(1, "reduce"))
print("candidates", space.candidates)
print("|A'| =", space.cardinality, "of", 2 ** (cfg.mu * cfg.L))

ch = realization(cfg, 0)
best_inside = exhaustive(cfg, ch, space=space)
best = exhaustive(cfg, ch)
print("best in A'", best_inside.secure_sum, " best overall", best.secure_sum)

# full codebook vs reduced space, same budget
spec = TrainSpec(episodes=40)
for name, sp in (("dqn", None), ("hdrl", space)):
    res = optimize(cfg, ch, sp, spec, np.random.default_rng(0), restart_best=True)
    print(f"{name:5s}", secure_sum(ch, res.best, cfg), "q evals", res.q_evals)
