"""Discrete RIS phase codebook, phase configurations and their enumeration."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "ENUMERATION_CAP",
    "EnumerationError",
    "PhaseConfig",
    "ReducedActionSpace",
    "phase_matrix",
    "unit_phasors",
    "enumerate_all",
    "enumerate_reduced",
    "index_blocks",
    "full_space",
]

ENUMERATION_CAP = 2**24


class EnumerationError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseConfig:
    """Per-element phase indices into the ``2**mu`` codebook (amplitudes are 1).

    Element ``l`` applies ``theta_l = 2 pi indices[l] / 2**mu``.
    """

    indices: tuple[int, ...]
    mu: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        n = 2 ** self.mu
        if self.mu < 1 or not idx:
            raise ValueError("PhaseConfig needs mu >= 1 and at least one element")
        bad = [i for i in idx if not 0 <= i < n]
        if bad:
            raise ValueError(f"phase index out of range [0, {n}): {bad}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def zeros(cls, L: int, mu: int) -> "PhaseConfig":
        return cls((0,) * L, mu)

    @classmethod
    def parse(cls, text: str, mu: int) -> "PhaseConfig":
        return cls(tuple(int(t) for t in text.split(",")), mu)

    def __str__(self) -> str:
        return ",".join(str(i) for i in self.indices)

    @property
    def L(self) -> int:
        return len(self.indices)

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(self.indices) / 2**self.mu

    @property
    def phasors(self) -> np.ndarray:
        return unit_phasors(self.mu)[np.asarray(self.indices)]

    def with_element(self, l: int, index: int) -> "PhaseConfig":
        idx = list(self.indices)
        idx[l] = index
        return PhaseConfig(tuple(idx), self.mu)

    def rotated(self, k: int) -> "PhaseConfig":
        """Every element advanced by ``k`` codebook steps (a common phase factor)."""
        n = 2**self.mu
        return PhaseConfig(tuple((i + k) % n for i in self.indices), self.mu)

    def canonical(self) -> "PhaseConfig":
        """The common rotation of this configuration with element 0 at index 0.

        A common phase factor on every element leaves all received powers,
        hence every rate, unchanged.
        """
        return self.rotated(-self.indices[0])


def unit_phasors(mu: int) -> np.ndarray:
    """``exp(j 2 pi i / 2**mu)`` for every codebook index, with exact axis values.

    Quarter turns are snapped so that e.g. index 2 of a 2-bit codebook is
    exactly ``-1`` rather than ``-1 + 1.2e-16j``.
    """
    n = 2**mu
    z = np.exp(2j * np.pi * np.arange(n) / n)
    for i in range(n):
        if (4 * i) % n == 0:
            z[i] = (1, 1j, -1, -1j)[(4 * i) // n]
    return z


def phase_matrix(p: PhaseConfig) -> np.ndarray:
    return np.diag(p.phasors)


@dataclass(frozen=True)
class ReducedActionSpace:
    """Allowed phase indices per element, kept from a frequency analysis.

    ``counts[l, i]`` is how often index ``i`` was selected for element ``l``.
    """

    candidates: tuple[tuple[int, ...], ...]
    mu: int
    counts: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        cands = tuple(tuple(int(i) for i in c) for c in self.candidates)
        n = 2**self.mu
        for l, c in enumerate(cands):
            if not 1 <= len(c) <= n:
                raise ValueError(f"element {l}: need 1..{n} candidates, got {len(c)}")
            if len(set(c)) != len(c) or any(not 0 <= i < n for i in c):
                raise ValueError(f"element {l}: invalid candidates {c}")
        object.__setattr__(self, "candidates", cands)

    @classmethod
    def full(cls, L: int, mu: int) -> "ReducedActionSpace":
        return cls(tuple(tuple(range(2**mu)) for _ in range(L)), mu)

    @property
    def L(self) -> int:
        return len(self.candidates)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.candidates)

    @property
    def cardinality(self) -> int:
        return math.prod(self.sizes)

    @property
    def full_cardinality(self) -> int:
        return 2 ** (self.mu * self.L)

    @property
    def mode(self) -> PhaseConfig:
        """First (most frequent) candidate of every element."""
        return PhaseConfig(tuple(c[0] for c in self.candidates), self.mu)

    def contains(self, p: PhaseConfig) -> bool:
        return all(i in c for i, c in zip(p.indices, self.candidates))

    def to_json(self) -> str:
        doc = {"mu": self.mu, "candidates": [list(c) for c in self.candidates]}
        if self.counts is not None:
            doc["counts"] = np.asarray(self.counts).astype(int).tolist()
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "ReducedActionSpace":
        doc = json.loads(text)
        counts = np.asarray(doc["counts"]) if "counts" in doc else None
        return cls(tuple(tuple(c) for c in doc["candidates"]), doc["mu"], counts)


def full_space(L: int, mu: int) -> ReducedActionSpace:
    return ReducedActionSpace.full(L, mu)


def _guard(choices: Sequence[Sequence[int]], mu: int, cap: int) -> int:
    sizes = [len(c) for c in choices]
    total = math.prod(sizes)
    if total > cap:
        if all(s == 2**mu for s in sizes):
            desc = f"2^{mu * len(sizes)}"
        else:
            desc = str(total)
        raise EnumerationError(f"cardinality {desc} exceeds cap {cap}")
    return total


def index_blocks(choices: Sequence[Sequence[int]], mu: int, cap: int = ENUMERATION_CAP,
                 block: int = 1 << 16) -> Iterator[np.ndarray]:
    """Yield ``(n, L)`` index arrays covering the product space in lexicographic order."""
    _guard(choices, mu, cap)
    choices = [np.asarray(c, dtype=np.int64) for c in choices]
    sizes = np.array([len(c) for c in choices], dtype=np.int64)
    total = int(np.prod(sizes))
    # mixed-radix digits, last element fastest
    strides = np.ones(len(sizes), dtype=np.int64)
    for l in range(len(sizes) - 2, -1, -1):
        strides[l] = strides[l + 1] * sizes[l + 1]
    for start in range(0, total, block):
        n = np.arange(start, min(start + block, total), dtype=np.int64)
        digits = (n[:, None] // strides[None, :]) % sizes[None, :]
        out = np.empty_like(digits)
        for l, c in enumerate(choices):
            out[:, l] = c[digits[:, l]]
        yield out


def enumerate_all(L: int, mu: int, cap: int = ENUMERATION_CAP) -> Iterator[PhaseConfig]:
    """Every configuration of ``L`` elements, lexicographic in the index vector."""
    _guard([range(2**mu)] * L, mu, cap)
    for idx in itertools.product(range(2**mu), repeat=L):
        yield PhaseConfig(idx, mu)


def enumerate_reduced(space: ReducedActionSpace, cap: int = ENUMERATION_CAP) -> Iterator[PhaseConfig]:
    _guard(space.candidates, space.mu, cap)
    for idx in itertools.product(*(sorted(c) for c in space.candidates)):
        yield PhaseConfig(idx, space.mu)
