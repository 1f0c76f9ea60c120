"""Experiment drivers behind the ``ris-lab`` subcommands.

Every driver takes a base :class:`SystemConfig` (whose ``rng_seed`` is the
experiment seed) and :class:`Settings`, and returns rows ready for
:func:`write_csv`.  Per-channel random streams are keyed by (purpose, L,
channel), so results do not depend on scheduling; only ``seconds`` columns
carry wall time.
"""

from __future__ import annotations

import contextlib
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .baselines import build_reduced, exhaustive, greedy, random_phase
from .channel import realization
from .config import SystemConfig
from .dqn import TrainSpec, optimize, train
from .env import RisEnv
from .ris import ENUMERATION_CAP, EnumerationError, PhaseConfig, ReducedActionSpace
from .rates import secure_sum
from .streams import stream

__all__ = [
    "ALGORITHMS",
    "DESK_DEFAULTS",
    "Settings",
    "meter",
    "Meter",
    "write_csv",
    "format_row",
    "hdrl_space",
    "scenario_seed",
    "instance",
    "compare",
    "sweep_L",
    "convergence",
    "timing",
    "power_sweep",
    "oracle",
]

ALGORITHMS = ("random", "greedy", "exhaustive", "dqn", "hdrl")

# desk-scale system overrides applied before any config file or --set
DESK_DEFAULTS = {"K": 3, "M": 2, "mu": 2}


@dataclass(frozen=True)
class Settings:
    L_list: tuple = (4, 8, 12)
    channels: int = 50
    exhaustive_channels: int | None = None   # cap on channels given to exhaustive search (None: all)
    cap: int = ENUMERATION_CAP
    random_trials: int = 1
    sweeps: int = 2
    runs: int = 20                # greedy runs feeding the frequency analysis
    n_l: int = 2
    episodes: int = 100
    conv_runs: int = 5            # independent training runs per (L, algorithm)
    conv_L: tuple = (8,)
    P_list: tuple = (30, 40, 50, 60, 70)
    power_optimizer: str = "greedy"
    oracle_L: int = 4
    oracle_instances: int = 20
    timing_channels: int = 5
    scenarios: str = "per-channel"  # "shared": one geometry for all channels
    clock: str = "wall"           # "off" writes 0 in every seconds column

    def __post_init__(self):
        if self.clock not in ("wall", "off"):
            raise ValueError("clock must be 'wall' or 'off'")
        if self.power_optimizer not in ("greedy", "hdrl"):
            raise ValueError("power_optimizer must be 'greedy' or 'hdrl'")
        if self.scenarios not in ("per-channel", "shared"):
            raise ValueError("scenarios must be 'per-channel' or 'shared'")
        if self.channels < 1 or self.runs < 1 or self.oracle_instances < 1:
            raise ValueError("channels, runs and oracle_instances must be >= 1")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def spec(self) -> TrainSpec:
        return TrainSpec(episodes=self.episodes)

    def with_(self, **kw) -> "Settings":
        return replace(self, **kw)


class Meter:
    def __init__(self):
        self.seconds = 0.0


@contextlib.contextmanager
def meter(op: str = "", enabled: bool = True):
    """Monotonic wall time of the ``with`` body, accumulated into ``.seconds``."""
    m = Meter()
    t0 = time.monotonic()
    try:
        yield m
    finally:
        m.seconds = time.monotonic() - t0 if enabled else 0.0


def format_row(row) -> list[str]:
    out = []
    for v in row:
        if isinstance(v, (float, np.floating)):
            out.append(format(float(v), ".17g"))
        else:
            out.append(str(v))
    return out


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(format_row(r)) + "\n")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("RIS_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _cells(fn, items):
    """Map ``fn`` over ``items``; results come back in input order."""
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _mean_se(v) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    se = float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


def desk_config(cfg: SystemConfig, L: int, **kw) -> SystemConfig:
    return cfg.derive(L=L, **kw) if (L != cfg.L or kw) else cfg


def hdrl_space(cfg: SystemConfig, st: Settings, scheme: str = "rsma") -> ReducedActionSpace:
    """The reduced space for a scenario, built on its own channel stream."""
    rng = stream(cfg.rng_seed, "reduce", cfg.L)
    return build_reduced(cfg, runs=st.runs, n_l=st.n_l, rng=rng, sweeps=st.sweeps, scheme=scheme)


def scenario_seed(seed: int, i: int) -> int:
    """Seed of Monte Carlo instance ``i`` of experiment ``seed``."""
    return int(stream(seed, "scenario", i).integers(2**63))


def instance(cfg: SystemConfig, st: Settings, i: int):
    """(config, channel) of Monte Carlo instance ``i``.

    ``per-channel``: a fresh scenario (geometry and fading) per instance;
    ``shared``: realization ``i`` of the one scenario ``cfg``.
    """
    if st.scenarios == "shared":
        return cfg, realization(cfg, i)
    c = cfg.derive(rng_seed=scenario_seed(cfg.rng_seed, i))
    return c, realization(c, 0)


def with_start(space: ReducedActionSpace, p: PhaseConfig) -> ReducedActionSpace:
    """``space`` widened by the indices of ``p``, so a run started at ``p``
    stays inside it."""
    return ReducedActionSpace(tuple(tuple(sorted(set(c) | {i})) for c, i in zip(space.candidates, p.indices)),
                              space.mu)


def _hdrl_channel(cfg, ch, space, gr, spec, rng, scheme):
    """HDRL on one channel: search the reduced space (widened by this
    channel's greedy answer) from the better of the space's mode and the
    greedy answer, and return the best configuration visited."""
    g0 = gr.phases.canonical()
    start = g0 if gr.secure_sum > secure_sum(ch, space.mode, cfg, scheme) else space.mode
    res = optimize(cfg, ch, with_start(space, g0), spec, rng, start=start, restart_best=True, scheme=scheme)
    return res, secure_sum(ch, res.best, cfg, scheme)


def compare(cfg: SystemConfig, st: Settings, algos=ALGORITHMS, scheme: str = "rsma") -> dict:
    """Run ``algos`` on ``st.channels`` Monte Carlo instances of ``cfg`` (see
    :func:`instance`).

    Returns ``{algo: {"values": array, "seconds": float}}``.  The learned
    optimizers train on each channel alone, restarting every episode from the
    best configuration found so far: plain DQN from all-zero phases over the
    full codebook, HDRL inside the reduced space of the instance's scenario
    (see :func:`_hdrl_channel`).  HDRL seconds include building the reduced
    space and the greedy pass.  Exhaustive is skipped (``values`` None,
    ``error`` set) when the codebook exceeds ``st.cap``, and limited to the
    first ``st.exhaustive_channels`` channels.
    """
    seed, L = cfg.rng_seed, cfg.L
    clock = st.clock == "wall"
    out = {a: {"values": [], "seconds": 0.0} for a in algos}
    spaces = {}
    exh_ok = "exhaustive" in algos
    if exh_ok and 2 ** (cfg.mu * L) > st.cap:
        exh_ok = False
        out["exhaustive"]["values"] = None
        out["exhaustive"]["error"] = f"cardinality 2^{cfg.mu * L} exceeds cap {st.cap}"
    spec = st.spec()
    for i in range(st.channels):
        c, ch = instance(cfg, st, i)
        gr = None
        if "greedy" in algos or "hdrl" in algos:
            with meter("greedy", clock) as m:
                gr = greedy(c, ch, sweeps=st.sweeps, scheme=scheme)
            for a in ("greedy", "hdrl"):
                if a in algos:
                    out[a]["seconds"] += m.seconds
            if "greedy" in algos:
                out["greedy"]["values"].append(gr.secure_sum)
        if "random" in algos:
            with meter("random", clock) as m:
                r = random_phase(c, ch, st.random_trials, stream(seed, "random", L, i), scheme)
            out["random"]["values"].append(r.secure_sum)
            out["random"]["seconds"] += m.seconds
        if exh_ok and (st.exhaustive_channels is None or i < st.exhaustive_channels):
            with meter("exhaustive", clock) as m:
                e = exhaustive(c, ch, cap=st.cap, scheme=scheme)
            out["exhaustive"]["values"].append(e.secure_sum)
            out["exhaustive"]["seconds"] += m.seconds
        if "dqn" in algos:
            with meter("dqn", clock) as m:
                res = optimize(c, ch, None, spec, stream(seed, "dqn", L, i), restart_best=True, scheme=scheme)
                v = secure_sum(ch, res.best, c, scheme)
            out["dqn"]["values"].append(v)
            out["dqn"]["seconds"] += m.seconds
        if "hdrl" in algos:
            with meter("hdrl", clock) as m:
                if c.rng_seed not in spaces:
                    spaces[c.rng_seed] = hdrl_space(c, st, scheme)
                res, v = _hdrl_channel(c, ch, spaces[c.rng_seed], gr, spec, stream(seed, "hdrl", L, i), scheme)
            out["hdrl"]["values"].append(v)
            out["hdrl"]["seconds"] += m.seconds
    if "hdrl" in algos:
        out["hdrl"]["spaces"] = list(spaces.values())
    for a in algos:
        if out[a]["values"] is not None:
            out[a]["values"] = np.asarray(out[a]["values"])
    return out


SWEEP_HEADER = ("L", "algo", "mean_rate", "stderr", "seconds")


def sweep_L(cfg: SystemConfig, st: Settings, algos=ALGORITHMS):
    """Secure sum rate against RIS size for every algorithm.

    Returns (rows, raw) where ``raw[L]`` is the :func:`compare` result.
    Exhaustive rows are omitted where the codebook exceeds the cap.
    """
    Ls = sorted(st.L_list)
    raws = _cells(lambda L: compare(desk_config(cfg, L), st, algos), Ls)
    rows = []
    for L, raw in zip(Ls, raws):
        for a in algos:
            if raw[a]["values"] is None:
                continue
            m, se = _mean_se(raw[a]["values"])
            rows.append((L, a, m, se, raw[a]["seconds"]))
    return rows, dict(zip(Ls, raws))


CONV_HEADER = ("L", "algo", "run", "episode", "mean_reward", "seconds")


def convergence(cfg: SystemConfig, st: Settings):
    """Per-episode mean reward of DQN and HDRL training (channels resampled
    every episode, all-zero initial phases)."""
    spec = st.spec()
    clock = st.clock == "wall"

    def cell(key):
        L, algo, run = key
        c = desk_config(cfg, L)
        space = hdrl_space(c, st) if algo == "hdrl" else None
        env = RisEnv(c, space, "resample", stream(c.rng_seed, "conv-env", L, algo, run))
        res = train(env, spec, stream(c.rng_seed, "conv-train", L, algo, run))
        secs = res.seconds if clock else [0.0] * len(res.seconds)
        return [(L, algo, run, ep, r, s) for ep, (r, s) in enumerate(zip(res.curve, secs))]

    keys = [(L, a, r) for L in sorted(st.conv_L) for a in ("dqn", "hdrl") for r in range(st.conv_runs)]
    rows = [row for part in _cells(cell, keys) for row in part]
    return rows


TIMING_HEADER = ("L", "algo", "channels", "seconds", "mean_rate", "status")


def timing(cfg: SystemConfig, st: Settings):
    """Wall time per optimizer run against L, alongside the rate reached."""
    sub = st.with_(channels=st.timing_channels)
    rows = []
    for L in sorted(st.L_list):
        raw = compare(desk_config(cfg, L), sub)
        for a in ALGORITHMS:
            if raw[a]["values"] is None:
                rows.append((L, a, 0, 0.0, 0.0, "skipped: " + raw[a]["error"]))
                continue
            n = len(raw[a]["values"])
            rows.append((L, a, n, raw[a]["seconds"] / n, float(np.mean(raw[a]["values"])), "ok"))
    return rows


POWER_HEADER = ("L", "P_t_dBm", "scheme", "mean_rate", "stderr")


def power_sweep(cfg: SystemConfig, st: Settings, L_list=None):
    """RSMA and NOMA secure sum rate against transmit power, phases optimized
    per scheme and channel by ``st.power_optimizer``."""
    L_list = sorted(L_list if L_list is not None else [L for L in st.L_list if L >= 8] or st.L_list)
    algo = st.power_optimizer
    out = []
    raw = {}
    for L in L_list:
        for P in st.P_list:
            c = desk_config(cfg, L, P_t_dBm=float(P))
            for scheme in ("rsma", "noma"):
                v = compare(c, st, (algo,), scheme=scheme)[algo]["values"]
                raw[(L, P, scheme)] = v
                m, se = _mean_se(v)
                out.append((L, float(P), scheme, m, se))
    return out, raw


ORACLE_HEADER = ("instance", "seed", "exhaustive", "greedy", "hdrl", "greedy_ratio", "hdrl_ratio")


def oracle(cfg: SystemConfig, st: Settings):
    """Small-instance comparison of greedy and HDRL with the exhaustive optimum.

    Instance ``i`` is Monte Carlo instance ``i`` of :func:`compare` at
    ``L = st.oracle_L``; ``seed`` is its scenario seed.
    """
    c = desk_config(cfg, st.oracle_L)
    n = st.oracle_instances
    raw = compare(c, st.with_(channels=n, exhaustive_channels=None), ("exhaustive", "greedy", "hdrl"))
    if raw["exhaustive"]["values"] is None:
        raise EnumerationError(raw["exhaustive"]["error"])
    rows = []
    for i in range(n):
        e, g, h = (float(raw[a]["values"][i]) for a in ("exhaustive", "greedy", "hdrl"))
        rows.append((i, instance(c, st, i)[0].rng_seed, e, g, h, g / e if e > 0 else 1.0, h / e if e > 0 else 1.0))
    return rows
