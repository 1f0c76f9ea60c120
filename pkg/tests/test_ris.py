import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from ris_lab.ris import (EnumerationError, PhaseConfig, ReducedActionSpace, enumerate_all, enumerate_reduced,
                         index_blocks, phase_matrix, unit_phasors)


def test_phasors_exact_on_axes():
    z = unit_phasors(2)
    assert list(z) == [1, 1j, -1, -1j]
    z3 = unit_phasors(3)
    assert z3[4] == -1 and np.allclose(np.abs(z3), 1.0)
    assert np.allclose(z3, np.exp(2j * np.pi * np.arange(8) / 8))


def test_phase_config_basics():
    p = PhaseConfig((0, 1, 2, 3), 2)
    assert p.L == 4 and str(p) == "0,1,2,3"
    assert PhaseConfig.parse("0,1,2,3", 2) == p
    assert np.allclose(p.thetas, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert np.allclose(np.diag(phase_matrix(p)), [1, 1j, -1, -1j])
    assert p.with_element(0, 3).indices == (3, 1, 2, 3)
    assert PhaseConfig.zeros(3, 1).indices == (0, 0, 0)


@pytest.mark.parametrize("idx, mu", [((4,), 2), ((-1,), 2), ((), 2), ((0,), 0)])
def test_phase_config_rejects(idx, mu):
    with pytest.raises(ValueError):
        PhaseConfig(idx, mu)


def test_rotation_and_canonical():
    p = PhaseConfig((2, 3, 0, 1), 2)
    assert p.rotated(1).indices == (3, 0, 1, 2)
    assert p.canonical().indices == (0, 1, 2, 3)
    assert np.allclose(p.rotated(1).phasors, 1j * p.phasors)


@given(hs.integers(1, 3), hs.lists(hs.integers(0, 7), min_size=1, max_size=6), hs.integers(-10, 10))
def test_canonical_is_rotation_invariant(mu, raw, k):
    p = PhaseConfig(tuple(i % 2**mu for i in raw), mu)
    assert p.rotated(k).canonical() == p.canonical()
    assert p.canonical().indices[0] == 0


def test_enumerate_all_lexicographic():
    got = [p.indices for p in enumerate_all(2, 1)]
    assert got == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(list(enumerate_all(3, 2))) == 64


def test_enumeration_cap():
    with pytest.raises(EnumerationError, match=r"cardinality 2\^60 exceeds cap"):
        next(enumerate_all(30, 2))
    with pytest.raises(EnumerationError):
        next(index_blocks([range(4)] * 13, 2))


@given(hs.lists(hs.integers(1, 3), min_size=1, max_size=4), hs.integers(1, 7))
@settings(max_examples=30)
def test_index_blocks_cover_product(sizes, block):
    choices = [tuple(range(s)) for s in sizes]
    rows = np.concatenate(list(index_blocks(choices, 2, block=block)))
    assert [tuple(r) for r in rows] == list(itertools.product(*choices))


def test_reduced_space():
    sp = ReducedActionSpace(((0, 2), (1,), (3, 0, 1)), 2)
    assert sp.sizes == (2, 1, 3) and sp.cardinality == 6 and sp.full_cardinality == 64
    assert sp.mode.indices == (0, 1, 3)
    assert sp.contains(PhaseConfig((2, 1, 0), 2)) and not sp.contains(PhaseConfig((1, 1, 0), 2))
    assert len(list(enumerate_reduced(sp))) == 6
    full = ReducedActionSpace.full(3, 2)
    assert full.cardinality == full.full_cardinality == 64


@pytest.mark.parametrize("cands", [((),), ((0, 0),), ((4,),), ((0, 1, 2, 3, 0),)])
def test_reduced_space_rejects(cands):
    with pytest.raises(ValueError):
        ReducedActionSpace(cands, 2)


def test_reduced_space_json():
    sp = ReducedActionSpace(((0, 2), (1, 3)), 2, np.array([[5, 0, 3, 0], [0, 4, 0, 4]]))
    doc = json.loads(sp.to_json())
    assert doc["candidates"] == [[0, 2], [1, 3]] and doc["counts"][0] == [5, 0, 3, 0]
    back = ReducedActionSpace.from_json(sp.to_json())
    assert back == sp and np.array_equal(back.counts, sp.counts)


@given(hs.lists(hs.integers(1, 4), min_size=1, max_size=6))
def test_cardinality_is_product(sizes):
    sp = ReducedActionSpace(tuple(tuple(range(s)) for s in sizes), 2)
    assert sp.cardinality == int(np.prod(sizes))
    if any(s < 4 for s in sizes):
        assert sp.cardinality < sp.full_cardinality
