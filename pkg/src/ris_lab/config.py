"""System parameters for the RIS-assisted secure satellite downlink.

:class:`SystemConfig` is an immutable value holding every physical and
protocol parameter.  Logarithmic quantities keep their unit as a key suffix
(``P_t_dBm``, ``G_S_dBi``, ``kappa_dB``); :func:`to_linear` turns a validated
config into a :class:`LinearConfig` with watts and linear gains.  Distances
are stored in metres.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ConfigError",
    "SystemConfig",
    "LinearConfig",
    "validate",
    "to_linear",
    "db_to_linear",
    "dbm_to_watt",
    "linear_to_db",
    "watt_to_dbm",
    "default_user_distances",
    "load_config",
]

KM = 1000.0
PRECODER_POLICIES = ("matched", "matched-current", "fixed-random")
LOS_MODES = ("fixed", "per-realization")


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def db_to_linear(x_db):
    if np.ndim(x_db):
        return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)
    return 10.0 ** (float(x_db) / 10.0)


def dbm_to_watt(x_dbm):
    return db_to_linear(x_dbm) / 1000.0


def linear_to_db(x):
    return 10.0 * math.log10(x)


def watt_to_dbm(x):
    return linear_to_db(x * 1000.0)


def default_user_distances(K: int, lo_km: float = 300.0, hi_km: float = 500.0) -> tuple[float, ...]:
    """Users spread evenly over the [300, 500] km RIS-to-user range, in metres."""
    if K == 1:
        return ((lo_km + hi_km) / 2 * KM,)
    return tuple(float(d) for d in np.linspace(lo_km * KM, hi_km * KM, K))


@dataclass(frozen=True)
class SystemConfig:
    """All system parameters; defaults are the reference scenario.

    ``precoder_policy`` selects how the BS precoders are built (see
    :func:`ris_lab.rates.make_precoders`), ``los_mode`` whether the
    line-of-sight geometry is a property of the scenario (``"fixed"``) or is
    redrawn with every channel realization (``"per-realization"``).
    """

    K: int = 5
    M: int = 3
    L: int = 30
    mu: int = 2
    e_count: int = 1
    B_w: float = 20e6
    sigma2_dBm: float = -96.0
    P_t_dBm: float = 70.0
    alpha_split: float = 0.3
    G_S_dBi: float = 40.0
    G_B_dBi: float = 20.0
    f_c: float = 14e9
    c: float = 3.0e8
    g_s: float = 1000.0
    d_SR: float = 300.0 * KM
    d_Rk: tuple[float, ...] | None = None
    d_Re: float = 450.0 * KM
    alpha_SR: float = 2.0
    alpha_RB: float = 2.5
    kappa_dB: float = 10.0
    mu_kappa_dB: float = 12.0
    rng_seed: int = 0
    precoder_policy: str = "matched"
    los_mode: str = "fixed"

    def __post_init__(self):
        if self.d_Rk is None:
            d = default_user_distances(self.K) if isinstance(self.K, int) and self.K >= 1 else ()
            object.__setattr__(self, "d_Rk", d)
        else:
            object.__setattr__(self, "d_Rk", tuple(float(x) for x in np.atleast_1d(self.d_Rk)))

    @property
    def n_phases(self) -> int:
        return 2 ** self.mu

    def derive(self, **changes) -> "SystemConfig":
        """Copy with ``changes`` applied.

        Changing ``K`` without passing ``d_Rk`` re-spreads the user distances
        over the default range.
        """
        if "K" in changes and "d_Rk" not in changes and changes["K"] != self.K:
            changes["d_Rk"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["d_Rk"] = list(self.d_Rk)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError([f"unknown field {k!r}" for k in unknown])
        return cls(**data)


def validate(cfg: SystemConfig) -> list[str]:
    """Return every violated invariant; an empty list means the config is valid."""
    errors = []
    for name in ("K", "M", "L", "mu"):
        v = getattr(cfg, name)
        if not isinstance(v, (int, np.integer)) or v < 1:
            errors.append(f"{name} must be an integer >= 1 (got {v!r})")
    if cfg.e_count != 1:
        errors.append(f"e_count must be 1 (got {cfg.e_count!r})")
    if not 0.0 < cfg.alpha_split <= 1.0:
        errors.append(f"alpha_split out of (0,1] (got {cfg.alpha_split!r})")
    for name in ("B_w", "f_c", "c", "g_s"):
        if not getattr(cfg, name) > 0:
            errors.append(f"{name} must be > 0 (got {getattr(cfg, name)!r})")
    for name in ("d_SR", "d_Re"):
        if not getattr(cfg, name) > 0:
            errors.append(f"{name} distance must be > 0 (got {getattr(cfg, name)!r})")
    if any(not d > 0 for d in cfg.d_Rk):
        errors.append("d_Rk distances must all be > 0")
    if isinstance(cfg.K, (int, np.integer)) and len(cfg.d_Rk) != cfg.K:
        errors.append(f"d_Rk length mismatch: {len(cfg.d_Rk)} distances for K={cfg.K}")
    for name in ("alpha_SR", "alpha_RB"):
        if not getattr(cfg, name) >= 0:
            errors.append(f"{name} must be >= 0 (got {getattr(cfg, name)!r})")
    for name in ("sigma2_dBm", "P_t_dBm", "G_S_dBi", "G_B_dBi", "kappa_dB", "mu_kappa_dB"):
        if not math.isfinite(getattr(cfg, name)):
            errors.append(f"{name} must be finite")
    if not isinstance(cfg.rng_seed, (int, np.integer)) or not 0 <= cfg.rng_seed < 2**64:
        errors.append(f"rng_seed must be an unsigned 64-bit integer (got {cfg.rng_seed!r})")
    if cfg.precoder_policy not in PRECODER_POLICIES:
        errors.append(f"precoder_policy must be one of {PRECODER_POLICIES} (got {cfg.precoder_policy!r})")
    if cfg.los_mode not in LOS_MODES:
        errors.append(f"los_mode must be one of {LOS_MODES} (got {cfg.los_mode!r})")
    return errors


def check(cfg: SystemConfig) -> SystemConfig:
    errors = validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


@dataclass(frozen=True)
class LinearConfig:
    """A validated config with every logarithmic quantity in linear units."""

    cfg: SystemConfig
    P_t: float
    sigma2: float
    G_S: float
    G_B: float
    kappa: float
    mu_kappa: float
    d_Rk: np.ndarray = field(repr=False)

    def __getattr__(self, name):
        # fall through to the untouched fields (K, L, B_w, ...)
        if name == "cfg":
            raise AttributeError(name)
        return getattr(self.cfg, name)


def to_linear(cfg: SystemConfig) -> LinearConfig:
    check(cfg)
    return LinearConfig(
        cfg=cfg,
        P_t=dbm_to_watt(cfg.P_t_dBm),
        sigma2=dbm_to_watt(cfg.sigma2_dBm),
        G_S=db_to_linear(cfg.G_S_dBi),
        G_B=db_to_linear(cfg.G_B_dBi),
        kappa=db_to_linear(cfg.kappa_dB),
        mu_kappa=db_to_linear(cfg.mu_kappa_dB),
        d_Rk=np.asarray(cfg.d_Rk, dtype=float),
    )


def load_config(path, **overrides) -> SystemConfig:
    """Read a flat JSON config; keys not given keep their defaults."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    data.update(overrides)
    return check(SystemConfig.from_dict(data))
