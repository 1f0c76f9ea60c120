"""Simulation of RIS-assisted secure RSMA satellite downlinks and optimizers
for the discrete RIS phase shifts (random, greedy, exhaustive, DQN, HDRL)."""

from .config import ConfigError, SystemConfig, load_config, to_linear
from .channel import ChannelRealization, generate, realization
from .ris import PhaseConfig, ReducedActionSpace
from .rates import SecrecyObjective, noma_report, rsma_report, secure_sum
from .baselines import build_reduced, exhaustive, greedy, random_phase

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "SystemConfig",
    "load_config",
    "to_linear",
    "ChannelRealization",
    "generate",
    "realization",
    "PhaseConfig",
    "ReducedActionSpace",
    "SecrecyObjective",
    "rsma_report",
    "noma_report",
    "secure_sum",
    "build_reduced",
    "exhaustive",
    "greedy",
    "random_phase",
]
