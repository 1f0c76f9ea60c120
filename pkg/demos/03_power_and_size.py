"""
RSMA vs NOMA, and rate vs RIS size
==================================

Small versions of the sweep-L and power-sweep experiments.
"""

from ris_lab import SystemConfig
from ris_lab.harness import DESK_DEFAULTS, Settings, power_sweep, sweep_L

cfg = SystemConfig().derive(**DESK_DEFAULTS, rng_seed=0)
st = Settings(L_list=(4, 8), channels=10, episodes=30, clock="off")

rows, _ = sweep_L(cfg, st, algos=("random", "greedy", "hdrl"))
for L, algo, m, se, _ in rows:
    print(f"L={L:2d} {algo:7s} {m:.4f} +- {se:.4f}")

rows, _ = power_sweep(cfg, st.with_(P_list=(30, 50, 70)), L_list=(8,))
for L, P, scheme, m, se in rows:
    print(f"P={P:4.0f} dBm {scheme:4s} {m:.4f} +- {se:.4f}")
