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
Seeded random DAGs and observable partitions for property testing.
"""

import numpy as np

from cutgraph.graph.dag import Dag, NodeKind


def random_dag(rng, n_nodes=None, **kwargs):
    """
    Random DAG with typed nodes.

    Node indices follow a topological order and every forward pair (i < j) is joined with probability
    `edge_probability` (default 2 / n_nodes). Each node is observable with probability `observable_probability`;
    at least one observable is always present. Observables are named x<i>, parameters t<i>.

    Parameters
    ----------
    rng : numpy.random.Generator
    n_nodes : int, optional
        Number of nodes. Drawn uniformly from [min_nodes, max_nodes] when omitted.
    kwargs
        min_nodes : int, optional (default=4)
        max_nodes : int, optional (default=30)
        edge_probability : float, optional (default=2/n_nodes)
        observable_probability : float, optional (default=.5)

    Returns
    -------
    Dag
    """

    min_nodes = kwargs.pop('min_nodes', 4)
    max_nodes = kwargs.pop('max_nodes', 30)
    edge_probability = kwargs.pop('edge_probability', None)
    observable_probability = kwargs.pop('observable_probability', .5)
    assert len(kwargs) == 0, f'unrecognized arguments passed in: {", ".join(kwargs.keys())}'

    if n_nodes is None:
        n_nodes = int(rng.integers(min_nodes, max_nodes + 1))
    if n_nodes < 1:
        raise ValueError(f'<n_nodes> must be positive, {n_nodes} was passed')
    if edge_probability is None:
        edge_probability = min(1., 2 / n_nodes)

    observable = rng.random(n_nodes) < observable_probability
    if not observable.any():
        observable[rng.integers(n_nodes)] = True

    names = [f'x{i}' if observable[i] else f't{i}' for i in range(n_nodes)]
    nodes = [
        (names[i], NodeKind.OBSERVABLE if observable[i] else NodeKind.PARAMETER)
        for i in range(n_nodes)
    ]
    edges = [
        (names[i], names[j])
        for i in range(n_nodes) for j in range(i + 1, n_nodes)
        if rng.random() < edge_probability
    ]
    return Dag(nodes, edges)


def random_partition(rng, observables, labels=('A', 'B')):
    """
    Split observables uniformly at random into len(labels) non-empty blocks.

    Returns
    -------
    dict
        {label: frozenset of observables}
    """

    observables = sorted(observables)
    if len(observables) < len(labels):
        raise ValueError(f'cannot split {len(observables)} observables into {len(labels)} non-empty blocks')
    order = rng.permutation(len(observables))
    assignment = np.empty(len(observables), dtype=int)
    assignment[order[:len(labels)]] = np.arange(len(labels))
    assignment[order[len(labels):]] = rng.integers(len(labels), size=len(observables) - len(labels))
    return {
        label: frozenset(observables[i] for i in range(len(observables)) if assignment[i] == k)
        for k, label in enumerate(labels)
    }
