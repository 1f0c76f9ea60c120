"""Episodic MDP over RIS phase configurations.

One action sets a single element to one of its allowed phase indices; the
reward is the RSMA secure sum rate after the change.  The channel is held
fixed within an episode and, in ``"resample"`` mode, redrawn at each reset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, generate
from .config import SystemConfig
from .rates import SecrecyObjective
from .ris import PhaseConfig, ReducedActionSpace

__all__ = ["Action", "EnvState", "RisEnv", "EpisodeExhausted", "featurize", "feature_length"]


class EpisodeExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class Action:
    element: int
    candidate: int


@dataclass(frozen=True, eq=False)
class EnvState:
    phases: PhaseConfig
    channel: ChannelRealization
    t: int
    episode: int


def feature_length(cfg: SystemConfig) -> int:
    return cfg.L + 2 * cfg.M * (cfg.K + 1)


def featurize(st: EnvState) -> np.ndarray:
    """Normalized phases ``theta_l / 2 pi`` followed by the real and imaginary
    parts of every cascaded vector ``h_B Phi G`` (users, then Eve), scaled by
    their joint RMS."""
    p, ch = st.phases, st.channel
    casc = (ch.receivers * p.phasors[None, :]) @ ch.G
    rms = np.sqrt(np.mean(np.abs(casc) ** 2))
    if rms > 0:
        casc = casc / rms
    theta = np.asarray(p.indices, dtype=float) / 2**p.mu
    return np.concatenate([theta, casc.real.ravel(), casc.imag.ravel()])


class RisEnv:
    """Phase-shift environment.

    Parameters
    ----------
    cfg : SystemConfig
    space : ReducedActionSpace, optional
        Allowed indices per element; the full codebook when omitted.
    mode : {"fixed-channel", "resample"}
    rng : numpy Generator
        Source of channel draws.
    steps : int, optional
        Episode length ``T``; defaults to ``2 L``.
    channel : ChannelRealization, optional
        The channel to use in fixed-channel mode (drawn from ``rng`` if omitted).
    scheme : {"rsma", "noma"}
        Multiple-access scheme behind the reward.
    """

    def __init__(self, cfg: SystemConfig, space: ReducedActionSpace | None = None, mode: str = "fixed-channel",
                 rng: np.random.Generator | None = None, steps: int | None = None,
                 channel: ChannelRealization | None = None, scheme: str = "rsma"):
        if mode not in ("fixed-channel", "resample"):
            raise ValueError(f"unknown mode {mode!r}")
        self.cfg = cfg
        self.space = space if space is not None else ReducedActionSpace.full(cfg.L, cfg.mu)
        if self.space.L != cfg.L or self.space.mu != cfg.mu:
            raise ValueError("action space does not match the config")
        self.mode = mode
        self.scheme = scheme
        self.rng = rng if rng is not None else np.random.default_rng()
        self.T = steps if steps is not None else 2 * cfg.L
        self._fixed = channel
        if mode == "fixed-channel" and channel is None:
            self._fixed = generate(cfg, self.rng)
        self._offsets = np.cumsum((0,) + self.space.sizes)
        self._elem = np.repeat(np.arange(cfg.L), self.space.sizes)
        self.n_actions = int(self._offsets[-1])
        self.episode = -1
        self.state: EnvState | None = None
        self.objective: SecrecyObjective | None = None
        self.value = 0.0

    def decode(self, a: int) -> Action:
        l = int(self._elem[a])
        return Action(l, int(a - self._offsets[l]))

    def encode(self, action: Action) -> int:
        if not 0 <= action.candidate < self.space.sizes[action.element]:
            raise ValueError(f"candidate {action.candidate} not allowed for element {action.element}")
        return int(self._offsets[action.element] + action.candidate)

    def phase_of(self, a: int) -> tuple[int, int]:
        """(element, codebook index) set by flat action ``a``."""
        act = self.decode(a)
        return act.element, self.space.candidates[act.element][act.candidate]

    def reset(self, start: PhaseConfig | None = None) -> EnvState:
        ch = self._fixed if self.mode == "fixed-channel" else generate(self.cfg, self.rng)
        self.episode += 1
        if self.objective is None or self.objective.ch is not ch:
            self.objective = SecrecyObjective(self.cfg, ch, self.scheme)
        p = start if start is not None else PhaseConfig.zeros(self.cfg.L, self.cfg.mu)
        self.state = EnvState(p, ch, 0, self.episode)
        self.value = self.objective(p)
        return self.state

    def step(self, a) -> tuple[EnvState, float, np.ndarray]:
        st = self.state
        if st is None:
            raise EpisodeExhausted("reset() has not been called")
        if st.t >= self.T:
            raise EpisodeExhausted(f"episode {st.episode} already ran {self.T} steps")
        if isinstance(a, Action):
            a = self.encode(a)
        l, idx = self.phase_of(int(a))
        p = st.phases.with_element(l, idx)
        self.state = EnvState(p, st.channel, st.t + 1, st.episode)
        self.value = self.objective(p)
        return self.state, self.value, featurize(self.state)

    @property
    def done(self) -> bool:
        return self.state is not None and self.state.t >= self.T
