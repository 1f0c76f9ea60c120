"""Large-scale path loss and Rician small-scale fading.

Links: BS -> RIS (``G``, L x M) and RIS -> receiver (``h``, 1 x L) for each
user and for the eavesdropper.  Each small-scale channel is

    H = sqrt(k / (1 + k)) * H_los + sqrt(1 / (1 + k)) * H_nlos

with ``k`` the linear Rician factor, ``H_nlos`` i.i.d. CN(0, 1) and
``H_los`` built from half-wavelength uniform-linear-array steering vectors,
so every LoS entry has unit modulus and E|H_ij|^2 = 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SystemConfig, to_linear
from .streams import stream

__all__ = [
    "ChannelRealization",
    "Geometry",
    "path_loss",
    "steering_vector",
    "draw_geometry",
    "generate",
    "link_budgets",
    "scenario_geometry",
    "realization",
    "dump_csv",
    "load_csv",
]


def path_loss(d, gain, f_c, c, alpha):
    """Free-space path loss ``gain * (c / (4 pi f_c))**2 * d**(-alpha)`` (linear)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError(f"path_loss: distance must be > 0 (got {d!r})")
    if not gain > 0:
        raise ValueError(f"path_loss: gain must be > 0 (got {gain!r})")
    out = gain * (c / (4.0 * np.pi * f_c)) ** 2 * d ** (-float(alpha))
    return float(out) if out.ndim == 0 else out


def steering_vector(n: int, angle: float) -> np.ndarray:
    """Half-wavelength ULA response, ``exp(j pi i sin(angle))`` for i < n."""
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


@dataclass(frozen=True)
class Geometry:
    """Angles (radians) defining the LoS components of every link."""

    ris_aoa: float
    bs_aod: float
    eve_aod: float
    user_aod: tuple[float, ...]


def draw_geometry(K: int, rng: np.random.Generator) -> Geometry:
    ris_aoa, bs_aod, eve_aod = rng.uniform(0.0, 2.0 * np.pi, size=3)
    users = rng.uniform(0.0, 2.0 * np.pi, size=K)
    return Geometry(float(ris_aoa), float(bs_aod), float(eve_aod), tuple(float(a) for a in users))


def scenario_geometry(cfg: SystemConfig) -> Geometry:
    """The static geometry of a scenario, fixed by ``cfg.rng_seed``."""
    return draw_geometry(cfg.K, stream(cfg.rng_seed, "geometry"))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of every small-scale channel plus the link budgets.

    Attributes
    ----------
    G : (L, M) complex array
        BS -> RIS channel.
    h_users : (K, L) complex array
        Row ``k`` is the RIS -> user ``k`` channel.
    h_eve : (L,) complex array
        RIS -> Eve channel.
    rho_users : (K,) float array
        ``L(d_SR) * L(d_Rk) * g_s`` per user.
    rho_eve : float
        ``L(d_SR) * L(d_Re) * g_s``.
    """

    G: np.ndarray
    h_users: np.ndarray
    h_eve: np.ndarray
    rho_users: np.ndarray
    rho_eve: float

    @property
    def K(self) -> int:
        return self.h_users.shape[0]

    @property
    def L(self) -> int:
        return self.G.shape[0]

    @property
    def M(self) -> int:
        return self.G.shape[1]

    @property
    def receivers(self) -> np.ndarray:
        """(K + 1, L) stack of the user channels followed by Eve's."""
        return np.vstack([self.h_users, self.h_eve[None, :]])

    @property
    def rhos(self) -> np.ndarray:
        return np.append(self.rho_users, self.rho_eve)

    def with_eve(self, h_eve, rho_eve=None) -> "ChannelRealization":
        return ChannelRealization(
            self.G, self.h_users, np.asarray(h_eve, dtype=complex),
            self.rho_users, self.rho_eve if rho_eve is None else float(rho_eve),
        )


def link_budgets(cfg: SystemConfig) -> tuple[np.ndarray, float]:
    lin = to_linear(cfg)
    l_sr = path_loss(cfg.d_SR, lin.G_S, cfg.f_c, cfg.c, cfg.alpha_SR)
    l_users = path_loss(lin.d_Rk, lin.G_B, cfg.f_c, cfg.c, cfg.alpha_RB)
    l_eve = path_loss(cfg.d_Re, lin.G_B, cfg.f_c, cfg.c, cfg.alpha_RB)
    return np.atleast_1d(l_sr * l_users * cfg.g_s), float(l_sr * l_eve * cfg.g_s)


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _rician(k, los, nlos):
    if np.isinf(k):
        return los.astype(complex)
    return np.sqrt(k / (1.0 + k)) * los + np.sqrt(1.0 / (1.0 + k)) * nlos


def generate(cfg: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one channel realization.

    With ``cfg.los_mode == "fixed"`` the LoS angles come from the scenario
    (see :func:`scenario_geometry`) and only the scattered components are
    drawn from ``rng``; otherwise the angles are drawn from ``rng`` too.
    """
    lin = to_linear(cfg)
    K, L, M = cfg.K, cfg.L, cfg.M
    if cfg.los_mode == "fixed":
        geo = scenario_geometry(cfg)
    else:
        geo = draw_geometry(K, rng)

    G_los = np.outer(steering_vector(L, geo.ris_aoa), steering_vector(M, geo.bs_aod).conj())
    h_los = np.array([steering_vector(L, a).conj() for a in geo.user_aod])
    e_los = steering_vector(L, geo.eve_aod).conj()

    G = _rician(lin.kappa, G_los, _cn(rng, (L, M)))
    h_users = _rician(lin.mu_kappa, h_los, _cn(rng, (K, L)))
    h_eve = _rician(lin.mu_kappa, e_los, _cn(rng, L))

    rho_users, rho_eve = link_budgets(cfg)
    return ChannelRealization(G, h_users, h_eve, rho_users, rho_eve)


def realization(cfg: SystemConfig, index: int, purpose: str = "channel") -> ChannelRealization:
    """The ``index``-th realization on the named stream of ``cfg.rng_seed``."""
    return generate(cfg, stream(cfg.rng_seed, purpose, index))


_CSV_HEADER = ("link", "row", "col", "re", "im")


def dump_csv(ch: ChannelRealization, path) -> None:
    """Write a realization as text: one row per complex entry plus the budgets.

    Columns are ``link,row,col,re,im``; ``link`` is ``G``, ``h`` (row = user),
    ``e``, ``rho`` (row = user, ``K`` for Eve; ``im`` is 0).
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_CSV_HEADER)
        for (i, j), z in np.ndenumerate(ch.G):
            w.writerow(("G", i, j, repr(float(z.real)), repr(float(z.imag))))
        for (i, j), z in np.ndenumerate(ch.h_users):
            w.writerow(("h", i, j, repr(float(z.real)), repr(float(z.imag))))
        for j, z in enumerate(ch.h_eve):
            w.writerow(("e", 0, j, repr(float(z.real)), repr(float(z.imag))))
        for i, r in enumerate(ch.rhos):
            w.writerow(("rho", i, 0, repr(float(r)), "0.0"))


def load_csv(path) -> ChannelRealization:
    rows = list(csv.DictReader(Path(path).open(encoding="utf-8")))
    by = {}
    for r in rows:
        by.setdefault(r["link"], []).append((int(r["row"]), int(r["col"]), complex(float(r["re"]), float(r["im"]))))

    def fill(entries):
        shape = (max(e[0] for e in entries) + 1, max(e[1] for e in entries) + 1)
        out = np.zeros(shape, dtype=complex)
        for i, j, z in entries:
            out[i, j] = z
        return out

    rho = fill(by["rho"]).real[:, 0]
    return ChannelRealization(fill(by["G"]), fill(by["h"]), fill(by["e"])[0], rho[:-1], float(rho[-1]))
