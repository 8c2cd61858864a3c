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
d-separation.

A path between two nodes is blocked by a set Z when it contains a non-collider that belongs to Z, or a collider
such that neither the collider nor any of its descendants belongs to Z. Z d-separates A from B when every path
between a node of A and a node of B is blocked.

`is_d_separated` answers queries with a linear-time reachability traversal. `is_d_separated_by_paths` applies the
path definition literally and is kept as the reference the fast version is tested against.
"""

import itertools
from typing import NamedTuple

import networkx as nx

from cutgraph.errors import OverlappingSets


class SeparationQuery(NamedTuple):
    a: frozenset
    b: frozenset
    z: frozenset = frozenset()

    def validated(self, dag):
        a, b, z = dag.node_set(self.a), dag.node_set(self.b), dag.node_set(self.z)
        overlap = (a & b) | (a & z) | (b & z)
        if len(overlap) > 0:
            raise OverlappingSets(f'query sets must be pairwise disjoint, shared nodes: {", ".join(sorted(overlap))}')
        return SeparationQuery(a, b, z)


def is_d_separated(dag, a, b, z=()):
    """
    Test whether `z` d-separates `a` from `b` in `dag`.

    Parameters
    ----------
    dag : Dag
    a, b, z : str or iterable of str
        Pairwise disjoint node sets.

    Returns
    -------
    bool

    Raises
    ------
    OverlappingSets
        If the three sets are not pairwise disjoint.
    UnknownNode
        If any node is not in the graph.
    """

    a, b, z = SeparationQuery(a, b, z).validated(dag)
    if len(a) == 0 or len(b) == 0:
        return True

    # colliders are open when they or one of their descendants is observed
    opens_collider = z | dag.ancestors(z)

    # (node, arrived_from_child): True means the traversal came up an edge into the node from one of its children
    stack = [(node, True) for node in a]
    visited = set()
    while stack:
        node, from_child = stack.pop()
        if (node, from_child) in visited:
            continue
        visited.add((node, from_child))
        if node in b:
            return False
        if from_child:
            if node not in z:
                stack.extend((parent, True) for parent in dag.parents(node))
                stack.extend((child, False) for child in dag.children(node))
        else:
            if node not in z:
                stack.extend((child, False) for child in dag.children(node))
            if node in opens_collider:
                stack.extend((parent, True) for parent in dag.parents(node))
    return True


def _path_is_blocked(dag, path, z):
    for previous, node, following in zip(path, path[1:], path[2:]):
        collider = dag.has_edge(previous, node) and dag.has_edge(following, node)
        if collider:
            if node not in z and len(dag.descendants(node) & z) == 0:
                return True
        elif node in z:
            return True
    return False


def is_d_separated_by_paths(dag, a, b, z=()):
    """
    Reference implementation enumerating every simple undirected path. Exponential; meant for small graphs.
    """

    a, b, z = SeparationQuery(a, b, z).validated(dag)
    skeleton = dag.to_networkx().to_undirected()
    for source, target in itertools.product(a, b):
        for path in nx.all_simple_paths(skeleton, source, target):
            if not _path_is_blocked(dag, path, z):
                return False
    return True
