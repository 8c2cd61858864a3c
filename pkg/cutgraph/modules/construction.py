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
Self-contained Bayesian modules.

A module is grown from a block X* of observables by walking parent edges backwards. Parameters and members of X*
are expanded; any other observable reached on the way is kept in the module but not expanded, because beyond it
the module no longer needs anything to be well defined.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import networkx as nx

from cutgraph.errors import NotAPartition, NotObservable
from cutgraph.graph.dag import Factor, sorted_nodes
from cutgraph.graph.separation import is_d_separated

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModuleSet:
    """
    Module Psi_I = (X_I, Theta_I) together with the observable block X*_I it was grown from.
    """

    label: str
    xstar: frozenset
    x: frozenset
    theta: frozenset

    @property
    def variables(self):
        return self.x | self.theta

    def __str__(self):
        return f'{self.label}: Theta = {{{", ".join(sorted_nodes(self.theta))}}}, ' \
               f'X = {{{", ".join(sorted_nodes(self.x))}}}'

    def to_dict(self):
        return {
            'label': self.label,
            'xstar': sorted_nodes(self.xstar),
            'x': sorted_nodes(self.x),
            'theta': sorted_nodes(self.theta),
        }


def _observable_block(dag, xstar):
    xstar = dag.node_set(xstar)
    invalid = [node for node in xstar if not dag.is_observable(node)]
    if len(invalid) > 0:
        raise NotObservable(f'module blocks may only contain observables, got parameters: '
                            f'{", ".join(sorted_nodes(invalid))}')
    return xstar


def _split_by_kind(dag, label, xstar, members):
    return ModuleSet(
        label=label,
        xstar=xstar,
        x=frozenset(node for node in members if dag.is_observable(node)),
        theta=frozenset(node for node in members if dag.is_parameter(node)),
    )


def construct_module(dag, label, xstar):
    """
    Grow the minimal self-contained module for the observable block `xstar`.

    Parameters
    ----------
    dag : Dag
    label : str
        Module label used in orderings and reports.
    xstar : iterable of str
        Observables forming the block.

    Returns
    -------
    ModuleSet

    Raises
    ------
    NotObservable
        If `xstar` contains a parameter.
    """

    xstar = _observable_block(dag, xstar)
    members = set(xstar)
    stack = list(xstar)
    while stack:
        node = stack.pop()
        for parent in dag.parents(node):
            if parent in members:
                continue
            members.add(parent)
            if dag.is_parameter(parent):
                stack.append(parent)
    module = _split_by_kind(dag, label, xstar, members)
    logger.debug('module %s', module)
    return module


def construct_module_by_paths(dag, label, xstar):
    """
    Path-wise module construction, kept as the reference for `construct_module`.

    A node belongs to the module when it is in X* or when some directed path from it to X* has no interior
    observable outside X* (the first foreign observable met going backwards is where the path stops).
    """

    xstar = _observable_block(dag, xstar)
    graph = dag.to_networkx()
    members = set(xstar)
    for node in dag.nodes:
        if node in members:
            continue
        for target in xstar:
            if any(
                all(dag.is_parameter(inner) or inner in xstar for inner in path[1:-1])
                for path in nx.all_simple_paths(graph, node, target)
            ):
                members.add(node)
                break
    return _split_by_kind(dag, label, xstar, members)


def associated_parameters(dag, xstar):
    """
    Parameters among the ancestors of X* that are not d-separated from X* by the observable ancestors of X*.
    """

    xstar = _observable_block(dag, xstar)
    observed = dag.observable_ancestors(xstar)
    candidates = dag.ancestors(xstar) & dag.parameters
    return frozenset(theta for theta in candidates if not is_d_separated(dag, {theta}, xstar, observed))


def associated_observables(dag, xstar):
    """
    Observable ancestors x of X* that are not d-separated from X* by the remaining observable ancestors.
    """

    xstar = _observable_block(dag, xstar)
    observed = dag.observable_ancestors(xstar)
    return frozenset(x for x in observed if not is_d_separated(dag, {x}, xstar, observed - {x}))


def associated_module(dag, label, xstar):
    """
    Module made of X* and its associated variables. Self-contained, but in general not minimal.
    """

    xstar = _observable_block(dag, xstar)
    return ModuleSet(
        label=label,
        xstar=xstar,
        x=xstar | associated_observables(dag, xstar),
        theta=associated_parameters(dag, xstar),
    )


@dataclass(frozen=True)
class TwoModulePartition:
    a_only: frozenset
    b_only: frozenset
    shared: frozenset
    complement: frozenset

    def to_dict(self):
        return {name: sorted_nodes(getattr(self, name)) for name in ('a_only', 'b_only', 'shared', 'complement')}


def check_partition(dag, blocks):
    """
    Verify that observable blocks are disjoint and cover every observable.
    """

    blocks = [dag.node_set(block) for block in blocks]
    seen = set()
    for block in blocks:
        overlap = seen & block
        if len(overlap) > 0:
            raise NotAPartition(f'observables assigned to more than one block: {", ".join(sorted_nodes(overlap))}')
        seen |= block
    missing = dag.observables - seen
    if len(missing) > 0:
        raise NotAPartition(f'observables not assigned to any block: {", ".join(sorted_nodes(missing))}')
    extra = seen - dag.observables
    if len(extra) > 0:
        raise NotObservable(f'blocks contain parameters: {", ".join(sorted_nodes(extra))}')


def two_module_partition(dag, mod_a, mod_b):
    """
    Split all nodes into A\\B, B\\A, A and B shared, and the complement of A and B.

    Raises
    ------
    NotAPartition
        If the blocks of the two modules overlap or leave an observable out.
    """

    check_partition(dag, [mod_a.xstar, mod_b.xstar])
    a, b = mod_a.variables, mod_b.variables
    return TwoModulePartition(
        a_only=a - b,
        b_only=b - a,
        shared=a & b,
        complement=frozenset(dag.nodes) - a - b,
    )


class Violation(NamedTuple):
    statement: str
    detail: str

    def __str__(self):
        return f'[{self.statement}] {self.detail}'


class StructureReport(NamedTuple):
    violations: tuple

    @property
    def ok(self):
        return len(self.violations) == 0

    def to_dict(self):
        return {'ok': self.ok, 'violations': [v._asdict() for v in self.violations]}


def _not_subset(subset, superset):
    return sorted_nodes(subset - superset)


def check_structure(dag, part):
    """
    Check the structural guarantees of a two-module partition built from modules grown on a bipartition.

    Statements checked
    ------------------
    complement : the complement holds parameters only and has no children.
    boundary : pa(A\\B) and pa(B\\A) lie in the shared set; their children lie in the shared set or the complement.
    v-structure : no A\\B -> shared <- B\\A configuration.
    shared-parents : parents of shared parameters are shared observables; parents of shared observables are
        parameters of any part or observables exclusive to one module.

    Returns
    -------
    StructureReport
        Never raises on a violation; an empty report means every statement holds.
    """

    violations = []
    params, obs = dag.parameters, dag.observables

    if len(part.complement & obs) > 0:
        violations.append(Violation('complement', f'observables in the complement: '
                                                  f'{sorted_nodes(part.complement & obs)}'))
    if len(dag.children(part.complement)) > 0:
        violations.append(Violation('complement', f'complement has children: '
                                                  f'{sorted_nodes(dag.children(part.complement))}'))

    for name, exclusive in (('A\\B', part.a_only), ('B\\A', part.b_only)):
        outside = _not_subset(dag.parents(exclusive), part.shared)
        if outside:
            violations.append(Violation('boundary', f'pa({name}) outside the shared set: {outside}'))
        outside = _not_subset(dag.children(exclusive), part.shared | part.complement)
        if outside:
            violations.append(Violation('boundary', f'ch({name}) outside shared set and complement: {outside}'))

    for node in sorted_nodes(part.shared):
        parents = dag.parents(node)
        if len(parents & part.a_only) > 0 and len(parents & part.b_only) > 0:
            violations.append(Violation('v-structure', f'{node} has parents in both A\\B and B\\A'))

    shared_theta, shared_x = part.shared & params, part.shared & obs
    outside = _not_subset(dag.parents(shared_theta), shared_x)
    if outside:
        violations.append(Violation('shared-parents', f'pa(shared parameters) outside shared observables: {outside}'))
    allowed = (params - part.complement) | ((part.a_only | part.b_only) & obs)
    outside = _not_subset(dag.parents(shared_x), allowed)
    if outside:
        violations.append(Violation('shared-parents', f'pa(shared observables) not allowed: {outside}'))

    return StructureReport(tuple(violations))


def is_self_contained(dag, mod):
    """
    True when the posterior factors of the module, p(v | pa(v)) for v in Theta and X*, only involve module variables.
    """

    return dag.parents(mod.theta | mod.xstar) <= mod.variables


def posterior_factor_groups(dag, mod, other):
    """
    Factors of the module posterior grouped by part of the two-module partition.

    Returns
    -------
    dict
        'theta_only', 'theta_shared', 'x_only', 'x_shared' mapped to lists of Factor; 'x_shared' only holds
        shared observables that belong to the module's own block.
    """

    shared = mod.variables & other.variables
    groups = {
        'theta_only': mod.theta - shared,
        'theta_shared': mod.theta & shared,
        'x_only': mod.x - shared,
        'x_shared': (mod.x & shared) & mod.xstar,
    }
    return {
        name: [Factor(frozenset([node]), dag.parents(node)) for node in sorted_nodes(nodes)]
        for name, nodes in groups.items()
    }


@dataclass(frozen=True)
class SevenWayPartition:
    """
    Disjoint groups of A, B and C. Single letters are exclusive parts (a = A minus B and C), pairs are exact
    pairwise overlaps, abc is the triple overlap and s the complement of A, B and C.
    """

    a: frozenset
    ab: frozenset
    ac: frozenset
    abc: frozenset
    b: frozenset
    bc: frozenset
    c: frozenset
    s: frozenset

    def double(self, name):
        """Module minus its exclusive part: 'a' gives ab | ac | abc."""

        return frozenset().union(*(getattr(self, g) for g in ('ab', 'ac', 'abc', 'bc') if name in g))


def seven_way_partition(dag, mod_a, mod_b, mod_c):
    a, b, c = mod_a.variables, mod_b.variables, mod_c.variables
    return SevenWayPartition(
        a=a - b - c,
        ab=(a & b) - c,
        ac=(a & c) - b,
        abc=a & b & c,
        b=b - a - c,
        bc=(b & c) - a,
        c=c - a - b,
        s=frozenset(dag.nodes) - a - b - c,
    )


def has_edge_between(dag, sources, targets):
    return any(dag.has_edge(s, t) for s in sources for t in targets)


def check_three_way(dag, mod_a, mod_b, mod_c):
    """
    Check the two branches of the three-module structure result for a split of T into B and C:
    with a non-empty B-C overlap outside A, some edge leaves it towards B or C; with an empty one, the exclusive
    parts of B and C are d-separated by A.

    Returns
    -------
    StructureReport
    """

    seven = seven_way_partition(dag, mod_a, mod_b, mod_c)
    violations = []
    if len(seven.bc) > 0:
        targets = (seven.b | mod_b.xstar) | (seven.c | mod_c.xstar)
        if not has_edge_between(dag, seven.bc, targets):
            violations.append(Violation('bc-edge', f'no edge from {sorted_nodes(seven.bc)} into B or C'))
    elif len(seven.b) > 0 and len(seven.c) > 0:
        if not is_d_separated(dag, seven.b, seven.c, mod_a.variables):
            violations.append(Violation('bc-separation', 'exclusive parts of B and C are not separated by A'))
    return StructureReport(tuple(violations))
