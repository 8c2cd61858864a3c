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

import enum
import logging
import re
from collections import deque
from typing import NamedTuple

import networkx as nx

from cutgraph.errors import (
    CycleDetected, DuplicateEdge, DuplicateNode, ModelError, SelfLoop, UnknownEndpoint, UnknownNode
)

logger = logging.getLogger(__name__)


def node_sort_key(name):
    """
    Natural sort key for node names, so that 'W_2' sorts before 'W_10'.
    All reports and enumerations in cutgraph iterate nodes in this order.
    """

    return tuple((0, int(part)) if part.isdigit() else (1, part) for part in re.split(r'(\d+)', name) if part)


def sorted_nodes(nodes):
    return sorted(nodes, key=node_sort_key)


class NodeKind(enum.Enum):
    OBSERVABLE = 'observable'
    PARAMETER = 'parameter'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ModelError(f'node kind must be \'observable\' or \'parameter\', {value!r} was passed')


class Factor(NamedTuple):
    """One entry p(head | conditioners) of a factorization."""

    head: frozenset
    conditioners: frozenset

    def __str__(self):
        head = ', '.join(sorted_nodes(self.head))
        if len(self.conditioners) == 0:
            return f'p({head})'
        return f'p({head} | {", ".join(sorted_nodes(self.conditioners))})'


class Dag:

    def __init__(self, nodes, edges):
        """
        Directed acyclic graph with typed nodes: the skeleton of a Markov-factorized model.

        Parameters
        ----------
        nodes : iterable or dict
            Pairs (name, kind) or a {name: kind} mapping. Kind is a NodeKind or one of 'observable', 'parameter'.
        edges : iterable
            Pairs (parent, child).

        Raises
        ------
        DuplicateNode, DuplicateEdge, UnknownEndpoint, SelfLoop, CycleDetected
        """

        if isinstance(nodes, dict):
            nodes = nodes.items()

        graph = nx.DiGraph()
        kinds = {}
        for name, kind in nodes:
            if not isinstance(name, str) or len(name) == 0:
                raise ModelError(f'node names must be non-empty strings, {name!r} was passed')
            if name in kinds:
                raise DuplicateNode(f'node \'{name}\' is declared more than once')
            kinds[name] = NodeKind.parse(kind)
            graph.add_node(name)

        for source, target in edges:
            for endpoint in (source, target):
                if endpoint not in kinds:
                    raise UnknownEndpoint(f'edge {source} -> {target} refers to undeclared node \'{endpoint}\'')
            if source == target:
                raise SelfLoop(f'self-loop on node \'{source}\'')
            if graph.has_edge(source, target):
                raise DuplicateEdge(f'edge {source} -> {target} is declared more than once')
            graph.add_edge(source, target)

        if not nx.is_directed_acyclic_graph(graph):
            cycle = [edge[0] for edge in nx.find_cycle(graph)]
            raise CycleDetected(f'graph contains the cycle {" -> ".join(cycle + cycle[:1])}')

        self.__graph = graph
        self.__kinds = kinds
        self.__nodes = tuple(sorted_nodes(kinds))
        self.__edges = tuple(sorted(graph.edges, key=lambda edge: (node_sort_key(edge[0]), node_sort_key(edge[1]))))
        self.__observables = frozenset(name for name, kind in kinds.items() if kind is NodeKind.OBSERVABLE)
        self.__parameters = frozenset(name for name, kind in kinds.items() if kind is NodeKind.PARAMETER)
        self.__ancestor_cache = {}
        self.__descendant_cache = {}
        logger.debug('validated DAG with %d nodes and %d edges', len(kinds), graph.number_of_edges())

    @property
    def nodes(self):
        return self.__nodes

    @property
    def edges(self):
        return self.__edges

    @property
    def observables(self):
        return self.__observables

    @property
    def parameters(self):
        return self.__parameters

    def kind(self, node):
        try:
            return self.__kinds[node]
        except KeyError:
            raise UnknownNode(f'node \'{node}\' is not in the graph')

    def is_observable(self, node):
        return self.kind(node) is NodeKind.OBSERVABLE

    def is_parameter(self, node):
        return self.kind(node) is NodeKind.PARAMETER

    def has_edge(self, source, target):
        return self.__graph.has_edge(source, target)

    def __contains__(self, node):
        return node in self.__kinds

    def __len__(self):
        return len(self.__nodes)

    def __iter__(self):
        return iter(self.__nodes)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.__kinds == other.__kinds and self.__edges == other.__edges

    def __hash__(self):
        return hash((self.__nodes, self.__edges))

    def __repr__(self):
        return f'Dag({len(self.__observables)} observables, {len(self.__parameters)} parameters, ' \
               f'{len(self.__edges)} edges)'

    def node_set(self, nodes):
        """
        Validated frozenset of node names. A single name is accepted as a one-element set.
        """

        if isinstance(nodes, str):
            nodes = (nodes,)
        nodes = frozenset(nodes)
        unknown = [node for node in nodes if node not in self.__kinds]
        if len(unknown) > 0:
            raise UnknownNode(f'nodes not in the graph: {", ".join(sorted_nodes(unknown))}')
        return nodes

    # pa, ch, an and de all exclude the query set itself
    def parents(self, nodes):
        nodes = self.node_set(nodes)
        return frozenset(p for node in nodes for p in self.__graph.predecessors(node)) - nodes

    def children(self, nodes):
        nodes = self.node_set(nodes)
        return frozenset(c for node in nodes for c in self.__graph.successors(node)) - nodes

    def ancestors(self, nodes):
        nodes = self.node_set(nodes)
        result = set()
        for node in nodes:
            result |= self.__closure(node, self.__ancestor_cache, self.__graph.predecessors)
        return frozenset(result - nodes)

    def descendants(self, nodes):
        nodes = self.node_set(nodes)
        result = set()
        for node in nodes:
            result |= self.__closure(node, self.__descendant_cache, self.__graph.successors)
        return frozenset(result - nodes)

    def observable_ancestors(self, nodes):
        return self.ancestors(nodes) & self.__observables

    @staticmethod
    def __closure(node, cache, step):
        if node not in cache:
            seen = set()
            queue = deque(step(node))
            while queue:
                current = queue.popleft()
                if current not in seen:
                    seen.add(current)
                    queue.extend(step(current))
            cache[node] = frozenset(seen)
        return cache[node]

    def topological_order(self):
        return list(nx.lexicographical_topological_sort(self.__graph, key=node_sort_key))

    def without_edges(self, edges):
        """New Dag with the given edges removed (edges absent from the graph are ignored)."""

        removed = set(edges)
        return Dag(
            nodes=[(node, self.__kinds[node]) for node in self.__nodes],
            edges=[edge for edge in self.__edges if edge not in removed]
        )

    def subgraph(self, nodes):
        """New Dag induced by `nodes`: those nodes and every edge between two of them."""

        kept = self.node_set(nodes)
        return Dag(
            nodes=[(node, self.__kinds[node]) for node in self.__nodes if node in kept],
            edges=[edge for edge in self.__edges if edge[0] in kept and edge[1] in kept]
        )

    def to_networkx(self):
        graph = nx.DiGraph()
        for node in self.__nodes:
            graph.add_node(node, kind=self.__kinds[node].value)
        graph.add_edges_from(self.__edges)
        return graph

    def to_dot(self, name='G'):
        """
        Graphviz DOT text. Observables are drawn as boxes and parameters as ellipses.
        """

        lines = [f'digraph {name} {{']
        for node in self.__nodes:
            shape = 'box' if self.__kinds[node] is NodeKind.OBSERVABLE else 'ellipse'
            lines.append(f'  "{node}" [shape={shape}];')
        for source, target in self.__edges:
            lines.append(f'  "{source}" -> "{target}";')
        lines.append('}')
        return '\n'.join(lines) + '\n'


def build_dag(nodes, edges):
    """
    Build and validate a Dag.

    Parameters
    ----------
    nodes : iterable or dict
        Pairs (name, kind) or a {name: kind} mapping.
    edges : iterable
        Pairs (parent, child).

    Returns
    -------
    Dag

    Examples
    --------
    >>> dag = build_dag([('a', 'parameter'), ('b', 'observable')], [('a', 'b')])
    >>> sorted(dag.parents('b'))
    ['a']
    """

    return Dag(nodes, edges)


def full_factorization(dag):
    """
    Markov factorization of the joint distribution: one factor p(v | pa(v)) per node, in topological order.
    """

    return [Factor(frozenset([node]), dag.parents(node)) for node in dag.topological_order()]
