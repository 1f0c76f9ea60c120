"""Feed-forward Q-network, replay memory and the epsilon-greedy training loop.

Plain DQN acts over every (element, codebook index) pair; HDRL runs the same
loop over a reduced action space (see :func:`ris_lab.baselines.build_reduced`).
Everything is numpy; gradients are hand-written backprop.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelRealization
from .config import SystemConfig
from .env import RisEnv, feature_length, featurize
from .ris import PhaseConfig, ReducedActionSpace

__all__ = [
    "QNet",
    "Adam",
    "ReplayMemory",
    "TrainSpec",
    "TrainResult",
    "td_loss",
    "train",
    "evaluate",
    "optimize",
    "HIDDEN",
]

HIDDEN = (30, 50, 80)


class QNet:
    """ReLU multilayer perceptron with a linear output layer.

    ``params`` alternates weight ``(n_in, n_out)`` and bias ``(n_out,)`` arrays.
    """

    def __init__(self, sizes, rng: np.random.Generator | None = None, zero: bool = False):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValueError(f"bad layer sizes {self.sizes}")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params: list[np.ndarray] = []
        for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]):
            if zero:
                W = np.zeros((n_in, n_out))
            else:
                W = rng.standard_normal((n_in, n_out)) * np.sqrt(2.0 / n_in)  # He init
            self.params += [W, np.zeros(n_out)]

    @classmethod
    def for_env(cls, n_features: int, n_actions: int, rng=None, hidden=HIDDEN) -> "QNet":
        return cls((n_features, *hidden, n_actions), rng)

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]

    def copy(self) -> "QNet":
        out = QNet.__new__(QNet)
        out.sizes = self.sizes
        out.params = [p.copy() for p in self.params]
        return out

    def forward(self, x, cache: bool = False):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        a = x[None, :] if single else x
        if a.shape[1] != self.n_in:
            raise ValueError(f"feature length {a.shape[1]} != input layer {self.n_in}")
        acts = [a]
        n = len(self.params) // 2
        for i in range(n):
            z = a @ self.params[2 * i] + self.params[2 * i + 1]
            a = np.maximum(z, 0.0) if i < n - 1 else z
            acts.append(a)
        out = a[0] if single else a
        return (out, acts) if cache else out

    __call__ = forward

    def backward(self, acts, d_out) -> list[np.ndarray]:
        """Parameter gradients given cached activations and dLoss/dOutput."""
        grads = [None] * len(self.params)
        delta = d_out
        n = len(self.params) // 2
        for i in range(n - 1, -1, -1):
            grads[2 * i] = acts[i].T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.params[2 * i].T) * (acts[i] > 0)
        return grads

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, v) -> None:
        v = np.asarray(v, dtype=float)
        pos = 0
        for i, p in enumerate(self.params):
            self.params[i] = v[pos:pos + p.size].reshape(p.shape).copy()
            pos += p.size
        if pos != v.size:
            raise ValueError("parameter vector length mismatch")

    def dumps(self) -> str:
        """Plain text: a ``sizes`` header line, then one parameter per line
        (layer by layer, weights row-major then biases)."""
        lines = ["sizes " + " ".join(map(str, self.sizes))]
        lines += [repr(float(x)) for x in self.flat()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "QNet":
        head, *rest = text.strip().splitlines()
        if not head.startswith("sizes "):
            raise ValueError("missing sizes header")
        net = cls([int(s) for s in head.split()[1:]], zero=True)
        net.set_flat([float(x) for x in rest])
        return net


def td_loss(net: QNet, target: QNet, batch, gamma: float):
    """Mean squared TD error and its gradient with respect to ``net``.

    ``batch`` is ``(s, a, r, s_next, done)``; the target network is treated
    as a constant and ``done`` rows drop the bootstrap term.
    """
    s, a, r, s2, done = batch
    a = np.asarray(a, dtype=np.int64)
    n = len(a)
    if n == 0:
        raise ValueError("empty batch")
    q, acts = net.forward(np.atleast_2d(s), cache=True)
    q_next = target.forward(np.atleast_2d(s2))
    y = np.asarray(r, dtype=float) + gamma * q_next.max(axis=1) * (1.0 - np.asarray(done, dtype=float))
    err = q[np.arange(n), a] - y
    loss = float(np.mean(err**2))
    d_out = np.zeros_like(q)
    d_out[np.arange(n), a] = 2.0 * err / n
    return loss, net.backward(acts, d_out)


class Adam:
    def __init__(self, net: QNet, lr: float = 0.008, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError("learning rate must be > 0")
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in net.params]
        self.v = [np.zeros_like(p) for p in net.params]
        self.t = 0

    def step(self, net: QNet, grads) -> None:
        for i, g in enumerate(grads):
            if not np.all(np.isfinite(g)):
                bad = int(np.sum(~np.isfinite(g)))
                raise FloatingPointError(f"non-finite gradient in parameter block {i} ({bad} entries) at step {self.t + 1}")
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for i, g in enumerate(grads):
            self.m[i] = self.b1 * self.m[i] + (1 - self.b1) * g
            self.v[i] = self.b2 * self.v[i] + (1 - self.b2) * g * g
            net.params[i] -= self.lr * (self.m[i] / c1) / (np.sqrt(self.v[i] / c2) + self.eps)


class ReplayMemory:
    """Fixed-capacity ring buffer of ``(s, a, r, s_next, done)`` transitions."""

    def __init__(self, capacity: int, n_features: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.s = np.zeros((capacity, n_features))
        self.s2 = np.zeros((capacity, n_features))
        self.a = np.zeros(capacity, dtype=np.int64)
        self.r = np.zeros(capacity)
        self.done = np.zeros(capacity, dtype=bool)
        self.n_pushed = 0

    def __len__(self) -> int:
        return min(self.n_pushed, self.capacity)

    def push(self, s, a, r, s2, done) -> None:
        i = self.n_pushed % self.capacity
        self.s[i], self.a[i], self.r[i], self.s2[i], self.done[i] = s, a, r, s2, done
        self.n_pushed += 1

    def sample(self, n: int, rng: np.random.Generator):
        idx = rng.integers(0, len(self), size=n)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx], self.done[idx]


@dataclass(frozen=True)
class TrainSpec:
    lr: float = 0.008
    gamma: float = 0.9
    batch: int = 10
    episodes: int = 100
    steps: int | None = None          # None -> 2 L
    eps_start: float = 1.0
    eps_decay: float = 0.95
    eps_floor: float = 0.05
    sync_every: int = 10              # episodes between target syncs
    replay: int = 1000
    hidden: tuple = HIDDEN

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("lr must be > 0")
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        if self.batch < 1 or self.episodes < 0 or self.sync_every < 1 or self.replay < 1:
            raise ValueError("batch, sync_every and replay must be >= 1, episodes >= 0")
        if not 0 <= self.eps_floor <= self.eps_start <= 1:
            raise ValueError("need 0 <= eps_floor <= eps_start <= 1")

    def with_(self, **kw) -> "TrainSpec":
        return replace(self, **kw)


@dataclass
class TrainResult:
    net: QNet
    curve: list            # mean reward (bit/s) per episode
    seconds: list          # wall time per episode
    best: PhaseConfig | None = None
    best_value: float = -np.inf
    q_evals: int = 0       # Q-values computed while acting (rows x outputs)
    actions: list = field(default_factory=list)  # (element, index) per step, when instrumented
    syncs: int = 0


def _reward_scale(env: RisEnv, rng: np.random.Generator) -> float:
    # typical magnitude of the objective, so that TD targets are O(1)
    idx = rng.integers(0, 2**env.cfg.mu, size=(32, env.cfg.L))
    v = env.objective.batch(idx) if env.objective is not None else np.zeros(1)
    m = float(np.mean(v))
    return m if m > 0 else 1.0


def train(env: RisEnv, spec: TrainSpec = TrainSpec(), rng: np.random.Generator | None = None,
          start: PhaseConfig | None = None, record_actions: bool = False,
          on_sync=None, on_step=None, restart_best: bool = False) -> TrainResult:
    """Epsilon-greedy Q-learning on ``env`` for ``spec.episodes`` episodes.

    One replay mini-batch update per environment step.  Rewards are divided
    by a fixed scale (mean objective of 32 random configurations on the first
    episode's channel) before entering the TD targets; the returned curve is
    in bit/s.  ``start`` replaces the all-zero initial configuration; with
    ``restart_best`` every episode starts from the best configuration seen.
    ``on_step(episode, t, net, target)`` and ``on_sync(episode, net, target)``
    are monitoring hooks.
    """
    rng = rng if rng is not None else np.random.default_rng()
    if spec.steps is not None:
        env.T = spec.steps
    n_feat = feature_length(env.cfg)
    net = QNet.for_env(n_feat, env.n_actions, rng, spec.hidden)
    target = net.copy()
    opt = Adam(net, spec.lr)
    mem = ReplayMemory(spec.replay, n_feat)
    res = TrainResult(net, [], [])
    eps = spec.eps_start
    scale = None
    for ep in range(spec.episodes):
        t0 = time.monotonic()
        st = env.reset(res.best if restart_best and res.best is not None else start)
        if scale is None:
            scale = _reward_scale(env, rng)
        if env.value > res.best_value:
            res.best, res.best_value = st.phases, env.value
        s = featurize(st)
        total = 0.0
        for t in range(env.T):
            if rng.random() < eps:
                a = int(rng.integers(env.n_actions))
            else:
                q = net.forward(s)
                res.q_evals += q.size
                a = int(np.argmax(q))
            st, r, s2 = env.step(a)
            if record_actions:
                res.actions.append(env.phase_of(a))
            if r > res.best_value:
                res.best, res.best_value = st.phases, r
            total += r
            mem.push(s, a, r / scale, s2, env.done)
            s = s2
            if len(mem) >= spec.batch:
                _, grads = td_loss(net, target, mem.sample(spec.batch, rng), spec.gamma)
                opt.step(net, grads)
            if on_step is not None:
                on_step(ep, t, net, target)
        res.curve.append(total / env.T)
        eps = max(spec.eps_floor, eps * spec.eps_decay)
        if (ep + 1) % spec.sync_every == 0:
            target = net.copy()
            res.syncs += 1
            if on_sync is not None:
                on_sync(ep, net, target)
        res.seconds.append(time.monotonic() - t0)
    return res


def rollout(net: QNet, env: RisEnv, start: PhaseConfig | None = None) -> tuple[PhaseConfig, float]:
    """Greedy-policy episode; returns the best configuration visited and its value."""
    st = env.reset(start)
    best, best_v = st.phases, env.value
    s = featurize(st)
    for _ in range(env.T):
        st, r, s = env.step(int(np.argmax(net.forward(s))))
        if r > best_v:
            best, best_v = st.phases, r
    return best, best_v


def evaluate(net: QNet, cfg: SystemConfig, space: ReducedActionSpace | None = None,
             channels: list[ChannelRealization] | None = None, n_channels: int = 10,
             rng: np.random.Generator | None = None, steps: int | None = None) -> dict:
    """Greedy (epsilon = 0) rollouts on held-out channels.

    Channels are taken from ``channels`` or drawn from ``rng``.  The value of
    a rollout is the best secure sum rate reached within the episode.
    """
    if channels is None:
        env = RisEnv(cfg, space, "resample", rng if rng is not None else np.random.default_rng(), steps)
        vals = [rollout(net, env)[1] for _ in range(n_channels)]
    else:
        vals = [rollout(net, RisEnv(cfg, space, "fixed-channel", steps=steps, channel=ch))[1] for ch in channels]
    vals = np.asarray(vals)
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return {"mean": float(vals.mean()), "stderr": se, "values": vals}


def optimize(cfg: SystemConfig, ch: ChannelRealization, space: ReducedActionSpace | None = None,
             spec: TrainSpec = TrainSpec(), rng: np.random.Generator | None = None,
             start: PhaseConfig | None = None, restart_best: bool = False, scheme: str = "rsma") -> TrainResult:
    """Per-channel optimizer: train on ``ch`` alone and keep the best
    configuration seen during training and a final greedy rollout."""
    env = RisEnv(cfg, space, "fixed-channel", channel=ch, steps=spec.steps, scheme=scheme)
    res = train(env, spec, rng, start=start, restart_best=restart_best)
    p, v = rollout(res.net, env, start)
    if v > res.best_value:
        res.best, res.best_value = p, v
    return res
