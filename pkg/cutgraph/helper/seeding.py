# cutgraph, modular (cut) Bayesian inference on DAG models
# Copyright (C), 2026 cutgraph developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.

"""
Seed handling. All randomness derives from one integer seed and a spawn key, so results do not depend on the
order in which parallel workers run.
"""

import os

import numpy as np

SEED_VARIABLE = 'CUTGRAPH_SEED'


def resolve_seed(seed=None):
    """
    Explicit seed, else the CUTGRAPH_SEED environment variable, else 0.
    """

    if seed is None:
        seed = os.environ.get(SEED_VARIABLE, 0)
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ValueError(f'seed must be a non-negative integer, {seed!r} was passed')
    if seed < 0:
        raise ValueError(f'seed must be a non-negative integer, {seed!r} was passed')
    return seed


def spawn_rng(seed, *key):
    """
    Generator for the stream identified by `key` (a tuple of non-negative integers) under `seed`.
    """

    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def legacy_state(rng):
    """
    RandomState state tuple seeded from `rng`, for samplers that keep their own legacy generator.
    """

    entropy = int(rng.integers(2 ** 63))
    return np.random.RandomState(np.random.MT19937(np.random.SeedSequence(entropy))).get_state()
