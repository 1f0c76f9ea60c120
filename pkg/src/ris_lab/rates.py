"""SINRs, achievable rates and secrecy rates under RSMA and NOMA.

Everything is computed analytically from the cascaded gains
``|h_B Phi G w_s|^2`` between every receiver ``B`` (the K users, then Eve)
and every stream ``s`` (the common stream, then the K private streams).

RSMA per user ``k`` (interference terms exactly as in the system model,
i.e. stream ``j`` is weighted by the gain of its intended user ``j``)::

    gc_k = rho_k p_c |h_k Phi G w_c|^2 / (sum_j rho_k p_j |h_j Phi G w_j|^2 + s2)
    gp_k = rho_k p_k |h_k Phi G w_k|^2 / (sum_{j!=k} rho_k p_j |h_j Phi G w_j|^2 + s2)

and the same two forms at Eve with ``rho_e`` and ``h_e`` everywhere.
Rates are ``B_w log2(1 + gamma)``; secrecy rates are clamped at zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields

import numpy as np

from .channel import ChannelRealization
from .config import LinearConfig, SystemConfig, to_linear
from .ris import PhaseConfig, unit_phasors
from .streams import stream

__all__ = [
    "PowerAllocation",
    "Precoders",
    "RateReport",
    "make_precoders",
    "rsma_report",
    "noma_report",
    "secure_sum",
    "SecrecyObjective",
    "capacity",
]

LN2 = np.log(2.0)


def capacity(B_w, gamma):
    """``B_w * log2(1 + gamma)`` via log1p, accurate for tiny SINRs."""
    return B_w * np.log1p(gamma) / LN2


def _linear(cfg) -> LinearConfig:
    return cfg if isinstance(cfg, LinearConfig) else to_linear(cfg)


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    p_c: float
    p_k: np.ndarray

    def __post_init__(self):
        p_k = np.atleast_1d(np.asarray(self.p_k, dtype=float))
        if self.p_c < 0 or np.any(p_k < 0):
            raise ValueError("stream powers must be non-negative")
        object.__setattr__(self, "p_k", p_k)

    @classmethod
    def rsma(cls, P_t: float, alpha: float, K: int) -> "PowerAllocation":
        """Common stream gets ``alpha P_t``, private streams share the rest uniformly."""
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha_split out of (0,1] (got {alpha!r})")
        return cls(alpha * P_t, np.full(K, (1.0 - alpha) * P_t / K))

    @classmethod
    def from_config(cls, cfg) -> "PowerAllocation":
        lin = _linear(cfg)
        return cls.rsma(lin.P_t, lin.alpha_split, lin.K)

    @property
    def total(self) -> float:
        return float(self.p_c + self.p_k.sum())

    @property
    def diag(self) -> np.ndarray:
        return np.append(self.p_c, self.p_k)


@dataclass(frozen=True, eq=False)
class Precoders:
    """Unit-norm common precoder ``w_c`` (M,) and private precoders ``w_k`` (K, M)."""

    w_c: np.ndarray
    w_k: np.ndarray

    @property
    def W(self) -> np.ndarray:
        """(M, K + 1) matrix ``[w_c, w_1, ..., w_K]``."""
        return np.column_stack([self.w_c, self.w_k.T])


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0 or not np.isfinite(n):
        e = np.zeros_like(v, dtype=complex)
        e[0] = 1.0
        return e
    return v / n


def make_precoders(ch: ChannelRealization, p: PhaseConfig | None = None, policy: str = "matched",
                   rng: np.random.Generator | None = None) -> Precoders:
    """Build unit-norm precoders.

    ``"matched"``: ``w_k`` is the normalized ``(h_k G)^H`` (RIS at identity)
    and ``w_c`` the normalized mean of the ``w_k``.  ``"matched-current"``
    does the same through the configuration ``p``.  ``"fixed-random"`` draws
    i.i.d. complex Gaussian directions from ``rng``.  A zero cascaded channel
    falls back to the first canonical basis vector.
    """
    K, M = ch.K, ch.M
    if policy == "fixed-random":
        if rng is None:
            raise ValueError("fixed-random precoders need an rng")
        raw = rng.standard_normal((K + 1, M)) + 1j * rng.standard_normal((K + 1, M))
        vs = np.array([_unit(v) for v in raw])
        return Precoders(vs[0], vs[1:])
    if policy == "matched":
        phasors = np.ones(ch.L)
    elif policy == "matched-current":
        if p is None:
            raise ValueError("matched-current precoders need a phase configuration")
        phasors = p.phasors
    else:
        raise ValueError(f"unknown precoder policy {policy!r}")
    casc = (ch.h_users * phasors[None, :]) @ ch.G
    w_k = np.array([_unit(v.conj()) for v in casc])
    w_c = _unit(w_k.mean(axis=0))
    return Precoders(w_c, w_k)


@dataclass(frozen=True, eq=False)
class RateReport:
    """Per-user SINRs and rates (bit/s) for one (channel, phases, powers) triple.

    Eve's private-stream quantities are per user (the stream she intercepts).
    NOMA reports carry zeros in the common-stream fields.
    """

    gamma_c: np.ndarray
    gamma_p: np.ndarray
    C_c: np.ndarray
    C_p: np.ndarray
    R_c: np.ndarray
    R_p: np.ndarray
    R: np.ndarray
    gamma_e_c: float
    gamma_e_p: np.ndarray
    C_e_c: float
    C_e_p: np.ndarray
    secure_sum: float

    CSV_COLUMNS = (
        "user", "gamma_c", "gamma_p", "C_c", "C_p", "R_c", "R_p", "R",
        "gamma_e_c", "gamma_e_p", "C_e_c", "C_e_p", "secure_sum",
    )

    def to_csv(self) -> str:
        """One row per user in :attr:`CSV_COLUMNS` order (17 significant digits)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for k in range(len(self.R)):
            vals = (self.gamma_c[k], self.gamma_p[k], self.C_c[k], self.C_p[k], self.R_c[k], self.R_p[k],
                    self.R[k], self.gamma_e_c, self.gamma_e_p[k], self.C_e_c, self.C_e_p[k], self.secure_sum)
            w.writerow([k] + [f"{float(v):.17g}" for v in vals])
        return buf.getvalue()


def _stream_gains(ch: ChannelRealization, phasors: np.ndarray, W: np.ndarray) -> np.ndarray:
    """(K+1, K+1) array: row = receiver (users then Eve), col = stream (common then private)."""
    casc = (ch.receivers * phasors[None, :]) @ ch.G
    return np.abs(casc @ W) ** 2


def _rsma_from_gains(g, rho, rho_e, p_c, p_k, sigma2, B_w):
    """Vectorized RSMA core.

    ``g`` has shape (..., K+1, K+1); returns a dict of arrays with leading
    batch dims.
    """
    K = p_k.shape[-1]
    own = g[..., np.arange(K), 1 + np.arange(K)] * p_k           # p_j |h_j Phi G w_j|^2
    others = np.ones((K, K)) - np.eye(K)
    S_all = own.sum(axis=-1, keepdims=True)
    S_excl = own @ others                                        # sum over j != k

    gamma_c = rho * p_c * g[..., :K, 0] / (rho * S_all + sigma2)
    gamma_p = rho * own / (rho * S_excl + sigma2)

    ge = g[..., K, :]
    own_e = ge[..., 1:] * p_k
    gamma_e_c = rho_e * p_c * ge[..., 0] / (rho_e * own_e.sum(axis=-1) + sigma2)
    gamma_e_p = rho_e * own_e / (rho_e * (own_e @ others) + sigma2)

    C_c = capacity(B_w, gamma_c)
    C_p = capacity(B_w, gamma_p)
    C_e_c = capacity(B_w, gamma_e_c)
    C_e_p = capacity(B_w, gamma_e_p)
    R_c = np.maximum(C_c - C_e_c[..., None], 0.0)
    R_p = np.maximum(C_p - C_e_p, 0.0)
    R = R_c + R_p
    return dict(gamma_c=gamma_c, gamma_p=gamma_p, C_c=C_c, C_p=C_p, R_c=R_c, R_p=R_p, R=R,
                gamma_e_c=gamma_e_c, gamma_e_p=gamma_e_p, C_e_c=C_e_c, C_e_p=C_e_p,
                secure_sum=R.sum(axis=-1))


def noma_powers(g_users: np.ndarray, P_t: float) -> np.ndarray:
    """Inverse-gain allocation normalized to ``P_t`` (batched over leading dims)."""
    g = np.maximum(g_users, np.finfo(float).tiny)
    inv = 1.0 / g
    return P_t * inv / inv.sum(axis=-1, keepdims=True)


def _noma_from_gains(g_users, g_eve, rho, rho_e, P_t, sigma2, B_w):
    """``g_users`` (..., K) and ``g_eve`` (...,) are gains through the shared precoder.

    Decoding order is ascending gain (ties by user index): a user cancels all
    weaker users' signals and treats stronger users' as interference.  Eve
    is evaluated with the same order.
    """
    K = g_users.shape[-1]
    p = noma_powers(g_users, P_t)
    order = np.argsort(g_users, axis=-1, kind="stable")
    p_sorted = np.take_along_axis(p, order, axis=-1)
    # power of all users decoded after position r (stronger users)
    tail = np.cumsum(p_sorted[..., ::-1], axis=-1)[..., ::-1]
    after_sorted = np.concatenate([tail[..., 1:], np.zeros(p_sorted.shape[:-1] + (1,))], axis=-1)
    after = np.empty_like(after_sorted)
    np.put_along_axis(after, order, after_sorted, axis=-1)

    gamma_p = rho * p * g_users / (rho * g_users * after + sigma2)
    ge = g_eve[..., None]
    gamma_e_p = rho_e * p * ge / (rho_e * ge * after + sigma2)
    C_p = capacity(B_w, gamma_p)
    C_e_p = capacity(B_w, gamma_e_p)
    R_p = np.maximum(C_p - C_e_p, 0.0)
    zeros = np.zeros_like(R_p)
    return dict(gamma_c=zeros, gamma_p=gamma_p, C_c=zeros, C_p=C_p, R_c=zeros, R_p=R_p, R=R_p,
                gamma_e_c=np.zeros(R_p.shape[:-1]), gamma_e_p=gamma_e_p, C_e_c=np.zeros(R_p.shape[:-1]),
                C_e_p=C_e_p, secure_sum=R_p.sum(axis=-1))


def _report(d) -> RateReport:
    scalars = {"gamma_e_c", "C_e_c", "secure_sum"}
    kw = {}
    for f in fields(RateReport):
        v = d[f.name]
        kw[f.name] = float(v) if f.name in scalars else np.asarray(v, dtype=float)
    return RateReport(**kw)


def rsma_report(ch: ChannelRealization, p: PhaseConfig, pow: PowerAllocation, pre: Precoders, cfg) -> RateReport:
    lin = _linear(cfg)
    g = _stream_gains(ch, p.phasors, pre.W)
    d = _rsma_from_gains(g, ch.rho_users, ch.rho_eve, pow.p_c, pow.p_k, lin.sigma2, lin.B_w)
    return _report(d)


def noma_report(ch: ChannelRealization, p: PhaseConfig, cfg, pre: Precoders | None = None) -> RateReport:
    """Power-domain NOMA through one shared precoder (``pre.w_c``)."""
    lin = _linear(cfg)
    if pre is None:
        pre = _precoders_for(ch, p, lin.cfg)
    casc = (ch.receivers * p.phasors[None, :]) @ ch.G
    g = np.abs(casc @ pre.w_c) ** 2
    d = _noma_from_gains(g[:-1], g[-1], ch.rho_users, ch.rho_eve, lin.P_t, lin.sigma2, lin.B_w)
    return _report(d)


def _precoders_for(ch, p, cfg: SystemConfig) -> Precoders:
    rng = stream(cfg.rng_seed, "precoders") if cfg.precoder_policy == "fixed-random" else None
    return make_precoders(ch, p, cfg.precoder_policy, rng)


def secure_sum(ch: ChannelRealization, p: PhaseConfig, cfg, scheme: str = "rsma") -> float:
    """The objective: sum of per-user secrecy rates (bit/s).

    A common phase factor on all elements does not change any rate, so the
    configuration is evaluated in its canonical rotation: equivalent
    configurations score bit-identically.
    """
    p = p.canonical()
    lin = _linear(cfg)
    pre = _precoders_for(ch, p, lin.cfg)
    if scheme == "rsma":
        return rsma_report(ch, p, PowerAllocation.from_config(lin), pre, lin).secure_sum
    if scheme == "noma":
        return noma_report(ch, p, lin, pre).secure_sum
    raise ValueError(f"unknown scheme {scheme!r}")


class SecrecyObjective:
    """Secure sum rate of one channel as a function of the phase indices.

    Precomputes, per RIS element, its contribution to every
    receiver/stream amplitude, so a batch of configurations costs a single
    matrix product.  Values agree with :func:`secure_sum` (which rebuilds
    everything from scratch) to rounding.
    """

    def __init__(self, cfg, ch: ChannelRealization, scheme: str = "rsma"):
        if scheme not in ("rsma", "noma"):
            raise ValueError(f"unknown scheme {scheme!r}")
        self.lin = _linear(cfg)
        self.cfg = self.lin.cfg
        self.ch = ch
        self.scheme = scheme
        self.mu = self.cfg.mu
        self.phasors = unit_phasors(self.mu)
        self.power = PowerAllocation.from_config(self.lin)
        self.n_evals = 0
        self._static = self.cfg.precoder_policy != "matched-current"
        if self._static:
            self.precoders = _precoders_for(ch, None, self.cfg)
            W = self.precoders.W if scheme == "rsma" else self.precoders.w_c[:, None]
            # amplitude[b, s] = sum_l phasor_l * h_b[l] * (G[l] @ w_s)
            per_elem = ch.receivers[:, :, None] * (ch.G @ W)[None, :, :]      # (B, L, S)
            self._S = W.shape[1]
            self._T = np.ascontiguousarray(per_elem.transpose(1, 0, 2).reshape(ch.L, -1))

    def _gains(self, idx: np.ndarray) -> np.ndarray:
        amp = self.phasors[idx] @ self._T
        g = np.abs(amp) ** 2
        return g.reshape(idx.shape[0], self.ch.K + 1, self._S)

    def batch(self, idx) -> np.ndarray:
        """Secure sum for each row of an ``(n, L)`` index array."""
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        self.n_evals += idx.shape[0]
        if not self._static:
            return np.array([secure_sum(self.ch, PhaseConfig(tuple(r), self.mu), self.lin, self.scheme)
                             for r in idx])
        g = self._gains(idx)
        lin, ch = self.lin, self.ch
        if self.scheme == "rsma":
            d = _rsma_from_gains(g, ch.rho_users, ch.rho_eve, self.power.p_c, self.power.p_k, lin.sigma2, lin.B_w)
        else:
            d = _noma_from_gains(g[:, :-1, 0], g[:, -1, 0], ch.rho_users, ch.rho_eve, lin.P_t, lin.sigma2, lin.B_w)
        return d["secure_sum"]

    def __call__(self, p) -> float:
        idx = p.indices if isinstance(p, PhaseConfig) else p
        return float(self.batch(np.asarray(idx)[None, :])[0])

    def report(self, p: PhaseConfig) -> RateReport:
        if self.scheme == "rsma":
            return rsma_report(self.ch, p, self.power, self.precoders if self._static
                               else _precoders_for(self.ch, p, self.cfg), self.lin)
        return noma_report(self.ch, p, self.lin)
