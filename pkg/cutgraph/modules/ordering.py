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
Module ordering.

Two modules sharing variables are ordered by where edges leave the shared set: an edge from the shared set into
B's exclusive part makes A a parent of B. After a module T is split into B and C, the relation between B and C is
read from edges leaving their overlap outside A, and the ordering graph is rewired around the new pair.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import networkx as nx

from cutgraph.errors import (
    CyclicOrdering, InconsistentSplit, ModelError, NotAPartition, UnknownModule, UnresolvedTie
)
from cutgraph.graph.dag import node_sort_key, sorted_nodes
from cutgraph.modules.construction import ModuleSet, check_partition, construct_module, has_edge_between

logger = logging.getLogger(__name__)

ARROW = '⇀'


class OrderRelation(enum.Enum):
    A_TO_B = 'AtoB'
    B_TO_A = 'BtoA'
    BOTH = 'Both'
    UNORDERED = 'Unordered'


class ReliabilityOrder:

    def __init__(self, labels):
        """
        Total order over block labels, most reliable first.
        """

        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ModelError(f'reliability order repeats labels: {labels}')
        self.labels = labels
        self.__rank = {label: i for i, label in enumerate(labels)}

    def __contains__(self, label):
        return label in self.__rank

    def __iter__(self):
        return iter(self.labels)

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f'ReliabilityOrder({", ".join(self.labels)})'

    def rank(self, label):
        try:
            return self.__rank[label]
        except KeyError:
            raise UnknownModule(f'label \'{label}\' is not in the reliability order {self.labels}')

    def more_reliable(self, first, second):
        return self.rank(first) < self.rank(second)


@dataclass(frozen=True)
class OrderingGraph:
    """
    DAG over module labels; an edge (P, C) makes P a parent module of C.
    """

    nodes: tuple
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, 'nodes', tuple(sorted(set(self.nodes), key=node_sort_key)))
        object.__setattr__(self, 'edges', frozenset(self.edges))
        unknown = {label for edge in self.edges for label in edge} - set(self.nodes)
        if len(unknown) > 0:
            raise UnknownModule(f'ordering edges refer to unknown modules: {sorted(unknown)}')
        if not nx.is_directed_acyclic_graph(self.graph):
            raise CyclicOrdering(f'module ordering contains a cycle: {sorted(self.edges)}')

    @property
    def graph(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(self.edges)
        return graph

    def __contains__(self, label):
        return label in self.nodes

    def _check(self, label):
        if label not in self.nodes:
            raise UnknownModule(f'module \'{label}\' is not in the ordering graph')

    def parents(self, label):
        self._check(label)
        return frozenset(p for p, c in self.edges if c == label)

    def children(self, label):
        self._check(label)
        return frozenset(c for p, c in self.edges if p == label)

    def ancestors(self, label):
        self._check(label)
        return frozenset(nx.ancestors(self.graph, label))

    def descendants(self, label):
        self._check(label)
        return frozenset(nx.descendants(self.graph, label))

    def topological_order(self):
        return list(nx.lexicographical_topological_sort(self.graph, key=node_sort_key))

    def restricted(self, labels):
        labels = set(labels)
        return OrderingGraph(tuple(labels), frozenset(e for e in self.edges if set(e) <= labels))

    def validate(self, modules):
        """
        Check that every edge joins modules with shared variables. `modules` maps labels to ModuleSet.
        """

        for parent, child in self.edges:
            if len(modules[parent].variables & modules[child].variables) == 0:
                raise ModelError(f'ordering edge {parent} -> {child} joins modules without shared variables')

    def describe(self):
        sorted_edges = sorted(self.edges, key=lambda e: (node_sort_key(e[0]), node_sort_key(e[1])))
        parts = [f'{p}{ARROW}{c}' for p, c in sorted_edges]
        linked = {label for edge in self.edges for label in edge}
        parts.extend(label for label in self.nodes if label not in linked)
        return ', '.join(parts)

    def to_dict(self):
        return {
            'nodes': list(self.nodes),
            'edges': [list(e) for e in sorted(self.edges, key=lambda e: (node_sort_key(e[0]), node_sort_key(e[1])))],
        }

    def to_dot(self, name='J'):
        lines = [f'digraph {name} {{']
        lines.extend(f'  "{label}";' for label in self.nodes)
        lines.extend(f'  "{p}" -> "{c}";' for p, c in self.to_dict()['edges'])
        lines.append('}')
        return '\n'.join(lines) + '\n'


class Outcome(NamedTuple):
    notation: str
    graph: OrderingGraph


@dataclass(frozen=True)
class ThreeModuleOrdering:
    case: str
    admissible: tuple
    chosen: Outcome = None

    @property
    def ambiguous(self):
        return len(self.admissible) > 1

    def to_dict(self):
        return {
            'case': self.case,
            'admissible': [o.notation for o in self.admissible],
            'chosen': None if self.chosen is None else self.chosen.notation,
        }


@dataclass(frozen=True)
class GroupedOrderingGraph:
    target: str
    ancestors: frozenset
    descendants: frozenset
    others: frozenset
    edges: frozenset

    def group_of(self, label):
        if label == self.target:
            return 'T'
        for name in ('ancestors', 'descendants', 'others'):
            if label in getattr(self, name):
                return {'ancestors': 'A', 'descendants': 'D', 'others': 'E'}[name]
        raise UnknownModule(f'module \'{label}\' is not in the grouped graph')


def order_two(dag, mod_a, mod_b):
    """
    Order two modules from the edges leaving their shared variables.

    Returns
    -------
    OrderRelation
        A_TO_B when edges only run from the shared set into B's exclusive part, B_TO_A for the mirror case,
        BOTH when edges run into both exclusive parts, UNORDERED otherwise.
    """

    a, b = mod_a.variables, mod_b.variables
    shared = a & b
    into_b = has_edge_between(dag, shared, b - a)
    into_a = has_edge_between(dag, shared, a - b)
    if into_a and into_b:
        relation = OrderRelation.BOTH
    elif into_b:
        relation = OrderRelation.A_TO_B
    elif into_a:
        relation = OrderRelation.B_TO_A
    else:
        relation = OrderRelation.UNORDERED
        if len(shared) > 0:
            logger.warning('modules %s and %s share %s but no edge leaves the shared set',
                           mod_a.label, mod_b.label, sorted_nodes(shared))
    logger.debug('order of %s and %s: %s', mod_a.label, mod_b.label, relation.value)
    return relation


def resolve_order(relation, mod_a, mod_b, reliability=None):
    """
    Resolve BOTH by making the more reliable module the parent.

    Raises
    ------
    UnresolvedTie
        If the relation is BOTH and no reliability order is given.
    """

    if relation is not OrderRelation.BOTH:
        return relation
    if reliability is None:
        raise UnresolvedTie(f'both {mod_a.label}{ARROW}{mod_b.label} and {mod_b.label}{ARROW}{mod_a.label} '
                            f'are admissible; a reliability order is required')
    resolved = OrderRelation.A_TO_B if reliability.more_reliable(mod_a.label, mod_b.label) else OrderRelation.B_TO_A
    logger.info('tie between %s and %s resolved as %s', mod_a.label, mod_b.label, resolved.value)
    return resolved


def two_module_graph(mod_a, mod_b, relation):
    if relation is OrderRelation.BOTH:
        raise UnresolvedTie('cannot build an ordering graph from an unresolved relation')
    edges = {
        OrderRelation.A_TO_B: {(mod_a.label, mod_b.label)},
        OrderRelation.B_TO_A: {(mod_b.label, mod_a.label)},
        OrderRelation.UNORDERED: set(),
    }[relation]
    return OrderingGraph((mod_a.label, mod_b.label), frozenset(edges))


def _outcome(notation, labels, edges):
    return Outcome(notation, OrderingGraph(tuple(labels), frozenset(edges)))


def _chain(*labels):
    return _outcome(ARROW.join(labels), labels, zip(labels, labels[1:]))


def order_three(dag, mod_a, mod_b, mod_c, prior_order, reliability=None, mod_t=None):
    """
    Order A, B and C after the module T was split into B and C.

    Parameters
    ----------
    dag : Dag
    mod_a, mod_b, mod_c : ModuleSet
    prior_order : OrderRelation
        Resolved relation between A and T: A_TO_B for A parent of T, B_TO_A for T parent of A, or UNORDERED.
    reliability : ReliabilityOrder, optional
        Used to pick one outcome when several are admissible: the more reliable of B and C becomes the ancestor.
        Without it the choice is left open (`chosen` is None when more than one outcome is admissible).
    mod_t : ModuleSet, optional
        The module that was split; checked against B and C when given.

    Returns
    -------
    ThreeModuleOrdering

    Raises
    ------
    UnresolvedTie
        If `prior_order` is BOTH.
    InconsistentSplit
        If the variables of B and C do not make up T.
    """

    if prior_order is OrderRelation.BOTH:
        raise UnresolvedTie('the order of A and the split module must be resolved first')
    if mod_t is not None and mod_b.variables | mod_c.variables != mod_t.variables:
        raise InconsistentSplit(f'{mod_b.label} and {mod_c.label} do not make up {mod_t.label}')

    a, b, c = mod_a.label, mod_b.label, mod_c.label
    A, B, C = mod_a.variables, mod_b.variables, mod_c.variables
    bc = (B & C) - A
    b_only, c_only = B - A - C, C - A - B
    into = {
        b: has_edge_between(dag, bc, b_only | mod_b.xstar),
        c: has_edge_between(dag, bc, c_only | mod_c.xstar),
    }
    shares = {b: len(A & B) > 0, c: len(A & C) > 0}
    labels = (a, b, c)
    outcomes = []

    if prior_order is OrderRelation.A_TO_B and shares[b] and shares[c]:
        case = '1(a)'
        if into[c]:
            outcomes.append(_chain(a, b, c))
        if into[b]:
            outcomes.append(_chain(a, c, b))
        if len(bc) == 0:
            outcomes.append(_outcome(f'{a}{ARROW}({b},{c})', labels, [(a, b), (a, c)]))
    elif prior_order is OrderRelation.A_TO_B:
        case = '1(b)'
        x, y = (b, c) if shares[b] else (c, b)
        if into[y]:
            outcomes.append(_chain(a, x, y))
        if into[x]:
            outcomes.append(_outcome(f'({a},{y}){ARROW}{x}', labels, [(a, x), (y, x)]))
        if len(bc) == 0:
            outcomes.append(_outcome(f'({y},({a}{ARROW}{x}))', labels, [(a, x)]))
    elif prior_order is OrderRelation.B_TO_A and shares[b] and shares[c]:
        case = '2(a)'
        if into[c]:
            outcomes.append(_chain(b, c, a))
        if into[b]:
            outcomes.append(_chain(c, b, a))
        if len(bc) == 0:
            outcomes.append(_outcome(f'({b},{c}){ARROW}{a}', labels, [(b, a), (c, a)]))
    elif prior_order is OrderRelation.B_TO_A:
        case = '2(b)'
        x, y = (b, c) if shares[b] else (c, b)
        if into[y]:
            outcomes.append(_outcome(f'{x}{ARROW}({a},{y})', labels, [(x, a), (x, y)]))
        if into[x]:
            outcomes.append(_chain(y, x, a))
        if len(bc) == 0:
            outcomes.append(_outcome(f'({y},({x}{ARROW}{a}))', labels, [(x, a)]))
    else:
        case = '3'
        if into[c]:
            outcomes.append(_outcome(f'({a},({b}{ARROW}{c}))', labels, [(b, c)]))
        if into[b]:
            outcomes.append(_outcome(f'({a},({c}{ARROW}{b}))', labels, [(c, b)]))
        if len(bc) == 0:
            outcomes.append(_outcome(f'({a},{b},{c})', labels, []))

    if len(outcomes) == 0:
        raise InconsistentSplit(f'{b} and {c} overlap outside {a} but no edge leaves the overlap')

    chosen = outcomes[0] if len(outcomes) == 1 else None
    if len(outcomes) > 1:
        logger.warning('several orderings admissible for %s, %s, %s (case %s): %s',
                       a, b, c, case, ', '.join(o.notation for o in outcomes))
        if reliability is not None:
            first, second = (b, c) if reliability.more_reliable(b, c) else (c, b)
            preferred = [o for o in outcomes if first in o.graph.ancestors(second)]
            chosen = preferred[0] if len(preferred) > 0 else outcomes[0]
            logger.info('chose %s by reliability', chosen.notation)
    return ThreeModuleOrdering(case=case, admissible=tuple(outcomes), chosen=chosen)


def group_modules(ordering, target):
    """
    Collapse the ordering graph around `target` into ancestors (A), descendants (D) and the rest (E).
    """

    ancestors = ordering.ancestors(target)
    descendants = ordering.descendants(target)
    others = frozenset(ordering.nodes) - ancestors - descendants - {target}
    group = {target: 'T'}
    group.update({label: 'A' for label in ancestors})
    group.update({label: 'D' for label in descendants})
    group.update({label: 'E' for label in others})
    edges = frozenset((group[p], group[c]) for p, c in ordering.edges if group[p] != group[c])
    return GroupedOrderingGraph(target, ancestors, descendants, others, edges)


def update_after_split(ordering, target, mod_b, mod_c, order_bc, modules):
    """
    Replace `target` by the pair B, C in the ordering graph.

    Parent modules of the target are attached to the parent of the pair when they share variables with it,
    otherwise to the other member; children are attached symmetrically starting from the child of the pair.
    With B and C unordered, every neighbour is attached to each member it shares variables with. Modules that
    are not direct neighbours of the target get no new edges.

    Parameters
    ----------
    ordering : OrderingGraph
    target : str
    mod_b, mod_c : ModuleSet
    order_bc : OrderingGraph
        Ordering restricted to B and C.
    modules : dict
        {label: ModuleSet} for the modules of `ordering` (the target included when available).

    Returns
    -------
    OrderingGraph
    """

    if target not in ordering:
        raise UnknownModule(f'module \'{target}\' is not in the ordering graph')
    if target in modules and mod_b.variables | mod_c.variables != modules[target].variables:
        raise InconsistentSplit(f'{mod_b.label} and {mod_c.label} do not make up {target}')

    b, c = mod_b.label, mod_c.label
    pair = {b: mod_b, c: mod_c}
    pair_edges = order_bc.restricted({b, c}).edges
    edges = {e for e in ordering.edges if target not in e} | set(pair_edges)

    if (b, c) in pair_edges:
        first, second = b, c
    elif (c, b) in pair_edges:
        first, second = c, b
    else:
        first = second = None

    def shares(label, member):
        return len(modules[label].variables & pair[member].variables) > 0

    for parent in sorted(ordering.parents(target), key=node_sort_key):
        if first is not None:
            attached = [m for m in (first, second) if shares(parent, m)][:1]
        else:
            attached = [m for m in (b, c) if shares(parent, m)]
        if len(attached) == 0:
            logger.warning('parent module %s shares nothing with %s or %s', parent, b, c)
        edges.update((parent, m) for m in attached)

    for child in sorted(ordering.children(target), key=node_sort_key):
        if first is not None:
            attached = [m for m in (second, first) if shares(child, m)][:1]
        else:
            attached = [m for m in (b, c) if shares(child, m)]
        if len(attached) == 0:
            logger.warning('child module %s shares nothing with %s or %s', child, b, c)
        edges.update((m, child) for m in attached)

    nodes = [label for label in ordering.nodes if label != target] + [b, c]
    return OrderingGraph(tuple(nodes), frozenset(edges))


def _merged(label, modules):
    modules = list(modules)
    union = lambda name: frozenset().union(*(getattr(m, name) for m in modules))
    return ModuleSet(label=label, xstar=union('xstar'), x=union('x'), theta=union('theta'))


def _residual_label(labels):
    return labels[0] if len(labels) == 1 else f'({labels[0]}..{labels[-1]})'


class SplitResult(NamedTuple):
    modules: tuple
    ordering: OrderingGraph


def sequential_split(dag, partition, reliability, tie_break='reliability'):
    """
    Form modules and their ordering by splitting off one block at a time, most reliable first.

    The most reliable block is split from the rest and the pair is ordered. Then the residual module is split
    repeatedly: each step orders the new pair against the ancestors of the residual module (or its descendants,
    or the remaining modules when it has neither) and rewires the ordering graph around it.

    Parameters
    ----------
    dag : Dag
    partition : dict
        {label: observables}; blocks must be disjoint and cover every observable.
    reliability : ReliabilityOrder or iterable of str
        Block labels, most reliable first.
    tie_break : str, optional
        'reliability' (default) makes the more reliable module the parent whenever several orderings are
        admissible; 'strict' raises UnresolvedTie instead.

    Returns
    -------
    SplitResult
        (modules in ordering-graph topological order, ordering graph)
    """

    if tie_break not in ('reliability', 'strict'):
        raise ValueError(f'<tie_break> must be \'reliability\' or \'strict\', {tie_break!r} was passed')
    if not isinstance(reliability, ReliabilityOrder):
        reliability = ReliabilityOrder(reliability)
    if set(reliability.labels) != set(partition):
        raise NotAPartition(f'reliability order {reliability.labels} does not match blocks {sorted(partition)}')
    check_partition(dag, partition.values())

    labels = list(reliability.labels)
    blocks = {label: dag.node_set(partition[label]) for label in labels}

    def build(block_labels):
        xstar = frozenset().union(*(blocks[label] for label in block_labels))
        return construct_module(dag, _residual_label(block_labels), xstar)

    if len(labels) == 1:
        module = build(labels)
        return SplitResult((module,), OrderingGraph((module.label,)))

    first, residual = build(labels[:1]), build(labels[1:])
    relation = order_two(dag, first, residual)
    if relation is OrderRelation.BOTH and tie_break == 'strict':
        raise UnresolvedTie(f'{first.label} and {residual.label} can be ordered either way')
    relation = resolve_order(relation, first, residual, ReliabilityOrder([first.label, residual.label]))
    modules = {first.label: first, residual.label: residual}
    ordering = two_module_graph(first, residual, relation)

    for r in range(1, len(labels) - 1):
        mod_t = modules.pop(residual.label)
        mod_b, mod_c = build(labels[r:r + 1]), build(labels[r + 1:])
        groups = group_modules(ordering, mod_t.label)
        if len(groups.ancestors) > 0:
            context, prior = groups.ancestors, OrderRelation.A_TO_B
        elif len(groups.descendants) > 0:
            context, prior = groups.descendants, OrderRelation.B_TO_A
        else:
            context, prior = groups.others, OrderRelation.UNORDERED
        mod_a = _merged('A', (modules[label] for label in sorted(context, key=node_sort_key)))
        three = order_three(
            dag, mod_a, mod_b, mod_c, prior,
            reliability=ReliabilityOrder([mod_b.label, mod_c.label]), mod_t=mod_t
        )
        if three.ambiguous and tie_break == 'strict':
            raise UnresolvedTie(f'admissible orderings: {", ".join(o.notation for o in three.admissible)}')
        logger.info('split %s into %s and %s: case %s, %s', mod_t.label, mod_b.label, mod_c.label,
                    three.case, three.chosen.notation)
        modules[mod_t.label] = mod_t
        ordering = update_after_split(
            ordering, mod_t.label, mod_b, mod_c, three.chosen.graph.restricted({mod_b.label, mod_c.label}), modules
        )
        del modules[mod_t.label]
        modules[mod_b.label] = mod_b
        modules[mod_c.label] = mod_c
        residual = mod_c

    return SplitResult(tuple(modules[label] for label in ordering.topological_order()), ordering)
