import numpy as np
import pytest

from cutgraph.helper.seeding import SEED_VARIABLE, legacy_state, resolve_seed, spawn_rng


def test_resolve_seed(monkeypatch):
    monkeypatch.delenv(SEED_VARIABLE, raising=False)
    assert resolve_seed() == 0
    assert resolve_seed(7) == 7
    monkeypatch.setenv(SEED_VARIABLE, '42')
    assert resolve_seed() == 42
    assert resolve_seed(3) == 3
    monkeypatch.setenv(SEED_VARIABLE, 'abc')
    with pytest.raises(ValueError):
        resolve_seed()
    with pytest.raises(ValueError):
        resolve_seed(-1)


def test_spawn_rng_streams():
    assert spawn_rng(1, 0, 2).random() == spawn_rng(1, 0, 2).random()
    assert spawn_rng(1, 0, 2).random() != spawn_rng(1, 2, 0).random()
    assert spawn_rng(1).random() != spawn_rng(2).random()


def test_legacy_state():
    state = legacy_state(spawn_rng(5))
    first = np.random.RandomState()
    first.set_state(state)
    second = np.random.RandomState()
    second.set_state(legacy_state(spawn_rng(5)))
    assert first.uniform() == second.uniform()
