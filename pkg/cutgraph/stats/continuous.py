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
Executable continuous and count families.

Parameters are sampled on unconstrained coordinates: positive parameters through their logarithm (with the
Jacobian added to the density) and Dirichlet vectors through independent log-gamma coordinates whose softmax is the
Dirichlet-distributed vector. Observables keep their natural scale.
"""

import functools
import logging
import operator
from dataclasses import dataclass, field

import numpy as np
import scipy.special
import scipy.stats

from cutgraph.errors import ModelError, NonFiniteDensity, UnresolvedReference, UnsupportedFamily
from cutgraph.graph.dag import sorted_nodes

logger = logging.getLogger(__name__)

POSITIVE = ('gamma', 'exponential')
FAMILIES = {
    'normal': ('mean', 'sd'),
    'gamma': ('shape', 'rate'),
    'exponential': ('rate',),
    'poisson': ('rate',),
    'dirichlet': ('alpha',),
    'multinomial': ('probability',),
}
DEFAULTS = {'sd': 1., 'rate': 1.}


def expression_references(expression):
    """Node names an expression refers to."""

    if isinstance(expression, (int, float)):
        return frozenset()
    if isinstance(expression, str):
        return frozenset([expression])
    if isinstance(expression, dict) and len(expression) == 1:
        (kind, terms), = expression.items()
        if kind in ('sum', 'product'):
            return frozenset().union(*(expression_references(term) for term in terms))
    raise ModelError(f'invalid expression {expression!r}')


def evaluate(expression, values):
    """
    Evaluate a number, a node name, or a {'sum': [...]} / {'product': [...]} expression.
    Values may be arrays, in which case the result broadcasts.
    """

    if isinstance(expression, (int, float)):
        return float(expression)
    if isinstance(expression, str):
        return values[expression]
    (kind, terms), = expression.items()
    evaluated = [evaluate(term, values) for term in terms]
    if kind == 'sum':
        return functools.reduce(operator.add, evaluated)
    return functools.reduce(operator.mul, evaluated)


@dataclass(frozen=True)
class Distribution:
    """
    Family of one node with its parameter expressions. Dirichlet nodes carry the ordered `group` of nodes that
    together form the Dirichlet vector.
    """

    family: str
    params: dict = field(default_factory=dict)
    group: tuple = ()

    def expression(self, name):
        return self.params.get(name, DEFAULTS.get(name))

    def references(self):
        return frozenset().union(*(expression_references(e) for e in self.params.values()))


class ContinuousModel:

    def __init__(self, dag, distributions):
        """
        Executable model over continuous and count families.

        Parameters
        ----------
        dag : Dag
        distributions : dict
            {node: Distribution} for every node.

        Raises
        ------
        UnsupportedFamily
            If a family has no continuous implementation.
        UnresolvedReference
            If an expression refers to a node that is not a parent.
        """

        missing = set(dag.nodes) - set(distributions)
        if len(missing) > 0:
            raise ModelError(f'no distribution for: {", ".join(sorted_nodes(missing))}')
        for node, distribution in distributions.items():
            if distribution.family not in FAMILIES:
                raise UnsupportedFamily(
                    f'family \'{distribution.family}\' of \'{node}\' cannot be evaluated by the continuous engine'
                )
            unknown = set(distribution.params) - set(FAMILIES[distribution.family])
            if len(unknown) > 0:
                raise ModelError(f'unknown {distribution.family} parameters for \'{node}\': {sorted(unknown)}')
            dangling = distribution.references() - dag.parents(node)
            if len(dangling) > 0:
                raise UnresolvedReference(f'\'{node}\' refers to non-parents {sorted_nodes(dangling)}')
            if distribution.family == 'dirichlet':
                if node not in distribution.group or not dag.is_parameter(node):
                    raise ModelError(f'dirichlet node \'{node}\' must be a parameter inside its own group')
                if isinstance(distribution.expression('alpha'), (dict, str)):
                    raise ModelError(f'dirichlet concentration of \'{node}\' must be a number')
            if distribution.family in ('poisson', 'multinomial') and not dag.is_observable(node):
                raise ModelError(f'{distribution.family} node \'{node}\' must be observable')
        self.dag = dag
        self.distributions = dict(distributions)

    def __repr__(self):
        return f'ContinuousModel({len(self.dag)} nodes)'

    def coordinates(self, nodes):
        """
        Sampling coordinates for `nodes`, in node order. Dirichlet groups must be complete.
        """

        nodes = frozenset(nodes)
        for node in nodes:
            group = self.distributions[node].group
            if len(group) > 0 and not set(group) <= nodes:
                raise ModelError(f'dirichlet group of \'{node}\' must be sampled as a whole')
        return tuple(sorted_nodes(nodes))

    def values_from(self, nodes, coordinates):
        """
        Node values from coordinates of shape (walkers, len(nodes)).
        """

        coordinates = np.atleast_2d(coordinates)
        column = {node: coordinates[:, i] for i, node in enumerate(nodes)}
        values = {}
        for node in nodes:
            distribution = self.distributions[node]
            if distribution.family in POSITIVE:
                values[node] = np.exp(column[node])
            elif distribution.family == 'dirichlet':
                group = np.column_stack([column[member] for member in distribution.group])
                values[node] = scipy.special.softmax(group, axis=1)[:, distribution.group.index(node)]
            else:
                values[node] = column[node]
        return values

    def initial_coordinates(self, nodes, rng, size, jitter=.1):
        """
        Starting coordinates near the prior centre: zero for normal nodes, the log prior mean for positive nodes
        and log alpha for Dirichlet coordinates.
        """

        centre = np.zeros(len(nodes))
        for i, node in enumerate(nodes):
            distribution = self.distributions[node]
            numeric = lambda name: isinstance(distribution.expression(name), (int, float))
            if distribution.family == 'gamma' and numeric('shape') and numeric('rate'):
                centre[i] = np.log(distribution.expression('shape') / distribution.expression('rate'))
            elif distribution.family == 'exponential' and numeric('rate'):
                centre[i] = -np.log(distribution.expression('rate'))
            elif distribution.family == 'dirichlet':
                centre[i] = np.log(distribution.expression('alpha'))
        return centre + jitter * rng.standard_normal((size, len(nodes)))

    def node_log_density(self, node, values, coordinate=None):
        """
        log p(node | parents). For sampled parameters `coordinate` is the unconstrained value and the result is
        the density of the coordinate.
        """

        distribution = self.distributions[node]
        family = distribution.family
        value = lambda name: evaluate(distribution.expression(name), values)
        x = values[node]
        if family == 'normal':
            point = x if coordinate is None else coordinate
            return scipy.stats.norm.logpdf(point, loc=value('mean'), scale=value('sd'))
        if family == 'gamma':
            density = scipy.stats.gamma.logpdf(x, a=value('shape'), scale=1 / value('rate'))
            return density if coordinate is None else density + coordinate
        if family == 'exponential':
            density = scipy.stats.expon.logpdf(x, scale=1 / value('rate'))
            return density if coordinate is None else density + coordinate
        if family == 'poisson':
            return scipy.stats.poisson.logpmf(x, value('rate'))
        if family == 'multinomial':
            return scipy.special.xlogy(x, value('probability')) - scipy.special.gammaln(x + 1)
        # dirichlet: density of one log-gamma coordinate
        if coordinate is None:
            raise ModelError(f'dirichlet node \'{node}\' can only be evaluated on its sampling coordinate')
        alpha = value('alpha')
        return alpha * coordinate - np.exp(coordinate) - scipy.special.gammaln(alpha)

    def log_density(self, likelihood, nodes, coordinates, fixed):
        """
        Sum of log p(v | pa(v)) over `likelihood` as a function of the coordinates of `nodes`.

        Parameters
        ----------
        likelihood : iterable of str
        nodes : tuple
            Sampled parameters, as returned by `coordinates`; every parameter of `likelihood` must be among them.
        coordinates : np.ndarray
            Shape (walkers, len(nodes)).
        fixed : dict
            Values of every other node that is reached: observations and conditioning parameters (scalars or
            arrays with one entry per walker).

        Returns
        -------
        np.ndarray
            One log density per walker; -inf where undefined.
        """

        coordinates = np.atleast_2d(coordinates)
        values = dict(fixed)
        values.update(self.values_from(nodes, coordinates))
        column = {node: coordinates[:, i] for i, node in enumerate(nodes)}
        total = np.zeros(len(coordinates))
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            for node in sorted_nodes(likelihood):
                if self.dag.is_parameter(node):
                    if node not in column:
                        raise ModelError(f'parameter \'{node}\' is in the likelihood but is not sampled')
                    total = total + self.node_log_density(node, values, column[node])
                else:
                    total = total + self.node_log_density(node, values)
        return np.where(np.isnan(total), -np.inf, total)

    def check_finite(self, likelihood, nodes, coordinates, fixed):
        density = self.log_density(likelihood, nodes, coordinates, fixed)
        if not np.all(np.isfinite(density)):
            raise NonFiniteDensity(f'log density is not finite at {np.sum(~np.isfinite(density))} starting points')
        return density
