"""Random, greedy and exhaustive phase optimizers, and the greedy-frequency
analysis that builds a reduced action space.

All optimizers search with the batched :class:`~ris_lab.rates.SecrecyObjective`
and report the value of their answer through :func:`~ris_lab.rates.secure_sum`,
so results from different optimizers are directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelRealization, generate
from .config import SystemConfig
from .rates import SecrecyObjective, secure_sum
from .ris import ENUMERATION_CAP, PhaseConfig, ReducedActionSpace, index_blocks

__all__ = [
    "OptimResult",
    "random_phase",
    "greedy",
    "exhaustive",
    "build_reduced",
    "reduce_from_log",
]


@dataclass
class OptimResult:
    phases: PhaseConfig
    secure_sum: float
    # greedy only: (sweep, element, chosen index) per coordinate update
    log: list = field(default_factory=list)
    values: list = field(default_factory=list)
    sweeps_run: int = 0


def _objective(cfg, ch, scheme, objective):
    return objective if objective is not None else SecrecyObjective(cfg, ch, scheme)


def random_phase(cfg: SystemConfig, ch: ChannelRealization, trials: int = 1,
                 rng: np.random.Generator | None = None, scheme: str = "rsma",
                 objective: SecrecyObjective | None = None) -> OptimResult:
    """Best of ``trials`` independent uniformly drawn configurations."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    obj = _objective(cfg, ch, scheme, objective)
    idx = rng.integers(0, 2**cfg.mu, size=(trials, cfg.L))
    best = int(np.argmax(obj.batch(idx)))
    p = PhaseConfig(tuple(idx[best]), cfg.mu)
    return OptimResult(p, secure_sum(ch, p, cfg, scheme))


def greedy(cfg: SystemConfig, ch: ChannelRealization, sweeps: int = 2, start: PhaseConfig | None = None,
           scheme: str = "rsma", objective: SecrecyObjective | None = None) -> OptimResult:
    """Element-by-element coordinate ascent over the phase codebook.

    Each update sets one element to the codebook index maximizing the secure
    sum rate with all other elements fixed (lowest index wins ties).  Stops
    after ``sweeps`` passes or earlier at a fixed point.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    obj = _objective(cfg, ch, scheme, objective)
    n = 2**cfg.mu
    cur = np.array(start.indices if start is not None else (0,) * cfg.L, dtype=np.int64)
    log, values = [], []
    done = 0
    for sweep in range(sweeps):
        changed = False
        for l in range(cfg.L):
            cand = np.repeat(cur[None, :], n, axis=0)
            cand[:, l] = np.arange(n)
            vals = obj.batch(cand)
            choice = int(np.argmax(vals))
            changed = changed or choice != cur[l]
            cur[l] = choice
            log.append((sweep, l, choice))
            values.append(float(vals[choice]))
        done = sweep + 1
        if not changed:
            break
    p = PhaseConfig(tuple(cur), cfg.mu)
    return OptimResult(p, secure_sum(ch, p, cfg, scheme), log, values, done)


def exhaustive(cfg: SystemConfig, ch: ChannelRealization, cap: int = ENUMERATION_CAP,
               space: ReducedActionSpace | None = None, scheme: str = "rsma",
               objective: SecrecyObjective | None = None, order: np.ndarray | None = None) -> OptimResult:
    """Global maximizer over the codebook (or over ``space``).

    Near-ties within 1e-9 relative of the best batched value are re-scored
    with :func:`secure_sum`; remaining ties go to the lexicographically
    smallest index vector.  ``order`` optionally permutes the enumeration
    (a testing aid; the result does not depend on it).
    """
    obj = _objective(cfg, ch, scheme, objective)
    choices = space.candidates if space is not None else [range(2**cfg.mu)] * cfg.L
    best_val = -np.inf
    pool: list[tuple[float, np.ndarray]] = []
    blocks = index_blocks(choices, cfg.mu, cap=cap, block=1 << 17)
    if order is not None:
        allidx = np.concatenate(list(blocks))[order]
        blocks = (allidx[i:i + (1 << 17)] for i in range(0, len(allidx), 1 << 17))
    for block in blocks:
        vals = obj.batch(block)
        m = vals.max()
        if m > best_val:
            best_val = m
            pool = [(v, c) for v, c in pool if v >= best_val * (1 - 1e-9)]
        keep = vals >= best_val * (1 - 1e-9)
        pool.extend(zip(vals[keep], block[keep]))
    rescored = []
    for _, c in pool:
        p = PhaseConfig(tuple(c), cfg.mu)
        rescored.append((-secure_sum(ch, p, cfg, scheme), p.indices))
    v, idx = min(rescored)
    return OptimResult(PhaseConfig(idx, cfg.mu), -v)


def reduce_from_log(finals: Sequence[Sequence[int]], mu: int, n_l: int | Sequence[int]) -> ReducedActionSpace:
    """Keep, per element, the ``n_l`` most frequently selected indices (ties -> lower index).

    ``finals`` holds one selected index vector per greedy run.
    """
    finals = np.asarray(finals, dtype=np.int64)
    runs, L = finals.shape
    n = 2**mu
    sizes = np.broadcast_to(np.asarray(n_l), (L,))
    if np.any(sizes < 1) or np.any(sizes > n):
        raise ValueError(f"n_l must lie in [1, {n}]")
    counts = np.zeros((L, n), dtype=np.int64)
    for l in range(L):
        counts[l] = np.bincount(finals[:, l], minlength=n)
    cands = []
    for l in range(L):
        # stable sort on -count keeps lower indices first among equal counts
        order = np.argsort(-counts[l], kind="stable")
        cands.append(tuple(int(i) for i in order[: sizes[l]]))
    return ReducedActionSpace(tuple(cands), mu, counts)


def build_reduced(cfg: SystemConfig, runs: int = 20, n_l: int = 2, rng: np.random.Generator | None = None,
                  sweeps: int = 2, channels: Iterable[ChannelRealization] | None = None,
                  scheme: str = "rsma", starts: str = "random", canonical: bool = True) -> ReducedActionSpace:
    """Frequency analysis of greedy selections over ``runs`` channel realizations.

    Realizations are drawn from ``rng`` unless ``channels`` is given.  With
    ``starts="random"`` each greedy run starts from a uniformly drawn
    configuration (drawn from ``rng`` after that run's channel); ``"zero"``
    starts from all-zero phases.  With ``canonical`` each final
    configuration is rotated so that element 0 sits at index 0 before
    counting, so runs that differ only by a common phase factor vote alike.
    """
    if starts not in ("random", "zero"):
        raise ValueError("starts must be 'random' or 'zero'")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if not 1 <= n_l <= 2**cfg.mu:
        raise ValueError(f"n_l must lie in [1, {2 ** cfg.mu}]")
    rng = rng if rng is not None else np.random.default_rng()
    if channels is None:
        channels = (generate(cfg, rng) for _ in range(runs))
    finals = []
    for ch in channels:
        start = None
        if starts == "random":
            start = PhaseConfig(tuple(rng.integers(0, 2**cfg.mu, size=cfg.L)), cfg.mu)
        p = greedy(cfg, ch, sweeps=sweeps, start=start, scheme=scheme).phases
        finals.append((p.canonical() if canonical else p).indices)
        if len(finals) == runs:
            break
    return reduce_from_log(finals, cfg.mu, n_l)
