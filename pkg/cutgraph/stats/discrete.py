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
Exact computations on discrete models.

Every node carries a conditional probability table. Numerics are done on broadcast arrays with one axis per free
node (in the order of the axes tuple) and observables clamped to their observed states, which keeps the code close
to the Markov factorization it evaluates.
"""

import itertools
import logging
from typing import NamedTuple

import numpy as np
import pandas as pd

from cutgraph.errors import (
    DimensionMismatch, ModelError, StateSpaceTooLarge, UnknownNode, ZeroProbabilityConditioning
)
from cutgraph.graph.dag import sorted_nodes
from cutgraph.graph.separation import SeparationQuery
from cutgraph.graph.random import random_dag
from cutgraph.modules.factorization import CutFactor, FactorKind

logger = logging.getLogger(__name__)

MAX_STATES = 2 ** 16


class CategoricalTable(NamedTuple):
    """
    p(node | parents) as an array of shape (*parent_states, states); the last axis sums to one.
    """

    states: int
    parents: tuple
    table: np.ndarray


class DiscreteModel:

    def __init__(self, dag, tables):
        """
        Executable discrete model: a Dag with a conditional probability table for every node.

        Parameters
        ----------
        dag : Dag
        tables : dict
            {node: CategoricalTable}. The parents of each table must be exactly the parents of the node.

        Raises
        ------
        ModelError
            If a table is missing, its parents disagree with the graph or a row does not sum to one.
        DimensionMismatch
            If a table shape disagrees with the declared numbers of states.
        """

        missing = set(dag.nodes) - set(tables)
        if len(missing) > 0:
            raise ModelError(f'no probability table for: {", ".join(sorted_nodes(missing))}')
        self.dag = dag
        self.__tables = {}
        for node in dag.nodes:
            states, parents, table = tables[node]
            parents = tuple(parents)
            if set(parents) != dag.parents(node) or len(set(parents)) != len(parents):
                raise ModelError(f'table parents {parents} of \'{node}\' differ from the graph parents '
                                 f'{sorted_nodes(dag.parents(node))}')
            self.__tables[node] = CategoricalTable(int(states), parents, np.asarray(table, dtype=float))
        for node, (states, parents, table) in self.__tables.items():
            expected = tuple(self.__tables[p].states for p in parents) + (states,)
            if table.shape != expected:
                raise DimensionMismatch(f'table of \'{node}\' has shape {table.shape}, expected {expected}')
            if np.any(table < 0) or not np.allclose(table.sum(axis=-1), 1, rtol=0, atol=1e-12):
                raise ModelError(f'rows of the table of \'{node}\' must be probabilities summing to one')

    def __repr__(self):
        return f'DiscreteModel({len(self.dag)} nodes, {self.state_space_size(self.dag.nodes)} joint states)'

    def states(self, node):
        try:
            return self.__tables[node].states
        except KeyError:
            raise UnknownNode(f'node \'{node}\' is not in the model')

    def table(self, node):
        return self.__tables[node]

    def state_space_size(self, nodes):
        return int(np.prod([self.states(node) for node in nodes], dtype=float))

    def _check_size(self, axes):
        size = self.state_space_size(axes)
        if size > MAX_STATES:
            raise StateSpaceTooLarge(f'{size} joint states over {len(axes)} nodes exceed the limit of {MAX_STATES}')

    def term(self, node, axes, evidence):
        """
        p(node | parents) broadcast over `axes`; nodes outside `axes` are taken from `evidence`.
        """

        states, parents, table = self.__tables[node]
        labels = list(parents) + [node]
        index = []
        for label in labels:
            if label in axes:
                index.append(slice(None))
            elif label in evidence:
                index.append(int(evidence[label]))
            else:
                raise ModelError(f'\'{label}\' is neither free nor observed')
        table = table[tuple(index)]
        free = [label for label in labels if label in axes]
        position = {axis: i for i, axis in enumerate(axes)}
        table = np.transpose(table, np.argsort([position[label] for label in free]))
        shape = [1] * len(axes)
        for label in free:
            shape[position[label]] = self.states(label)
        return table.reshape(shape)

    def potential(self, nodes, axes, evidence):
        """Product of p(v | pa(v)) over `nodes`, broadcast over `axes`."""

        result = np.ones([1] * len(axes))
        for node in nodes:
            result = result * self.term(node, axes, evidence)
        return result

    def joint(self, evidence=None):
        """
        Joint probability over every node not in `evidence`, clamped to the observed states.

        Returns
        -------
        tuple
            (axes, array) with one array axis per free node.
        """

        evidence = dict(evidence or {})
        axes = tuple(node for node in self.dag.nodes if node not in evidence)
        self._check_size(axes)
        full = self.potential(self.dag.nodes, axes, evidence)
        return axes, np.broadcast_to(full, [self.states(a) for a in axes])

    def _observed(self, evidence):
        missing = self.dag.observables - set(evidence)
        if len(missing) > 0:
            raise ModelError(f'observations missing for: {", ".join(sorted_nodes(missing))}')
        return {node: int(evidence[node]) for node in self.dag.observables}

    @property
    def parameter_axes(self):
        return tuple(node for node in self.dag.nodes if self.dag.is_parameter(node))

    def factor_table(self, factor, evidence):
        """
        Conditional table of a cut factor over the parameter axes.

        The potential over the factor's likelihood nodes is summed over its nuisance parameters and normalised
        over its target, so the result varies along target and conditioning axes only.

        Parameters
        ----------
        factor : CutFactor
        evidence : dict
            Observed state of every observable.

        Returns
        -------
        np.ndarray
            Array with one axis per parameter (see `parameter_axes`); conditioning states of zero probability
            get an all-zero slice.
        """

        observed = self._observed(evidence)
        axes = self.parameter_axes
        self._check_size(axes)
        potential = np.broadcast_to(
            self.potential(factor.likelihood, axes, observed),
            [self.states(a) if a in factor.likelihood | self.dag.parents(factor.likelihood) else 1 for a in axes]
        )
        nuisance = tuple(i for i, a in enumerate(axes) if a in factor.nuisance(self.dag))
        if len(nuisance) > 0:
            potential = potential.sum(axis=nuisance, keepdims=True)
        target = tuple(i for i, a in enumerate(axes) if a in factor.target)
        normaliser = potential.sum(axis=target, keepdims=True)
        with np.errstate(invalid='ignore', divide='ignore'):
            result = np.where(normaliser > 0, potential / normaliser, 0.0)
        if np.all(normaliser == 0):
            raise ZeroProbabilityConditioning(f'{factor} has zero probability for every conditioning state')
        return result

    def factorization_table(self, cf, evidence):
        """
        Joint table over all parameters implied by a cut factorization.
        """

        axes = self.parameter_axes
        result = np.ones([1] * len(axes))
        for factor in cf:
            result = result * self.factor_table(factor, evidence)
        return np.broadcast_to(result, [self.states(a) for a in axes])

    def marginal(self, table, nodes):
        """Marginal of a parameter-axes table onto `nodes`, keeping the parameter axis order."""

        axes = self.parameter_axes
        drop = tuple(i for i, a in enumerate(axes) if a not in nodes)
        table = np.broadcast_to(table, [self.states(a) for a in axes])
        return table.sum(axis=drop)

    def simulate(self, rng):
        """One joint draw by ancestral sampling, as {node: state}."""

        draw = {}
        for node in self.dag.topological_order():
            states, parents, table = self.__tables[node]
            probabilities = table[tuple(draw[p] for p in parents)]
            draw[node] = int(rng.choice(states, p=probabilities))
        return draw

    def sample_factor(self, factor, evidence, draws, rng, size=None):
        """
        Draw the target of `factor` once for every row of `draws`.

        Draws are grouped by their conditioning state so each distinct conditional is computed once.

        Parameters
        ----------
        factor : CutFactor
        evidence : dict
        draws : dict
            {parameter: int array}; must hold every conditioning parameter.
        rng : numpy.random.Generator
        size : int, optional
            Number of draws; taken from `draws` when omitted.

        Returns
        -------
        dict
            {target parameter: int array} aligned with the rows of `draws`.
        """

        table = self.factor_table(factor, evidence)
        axes = self.parameter_axes
        conditioning = [a for a in axes if a in factor.conditioning]
        target = [a for a in axes if a in factor.target]
        if size is None:
            if len(draws) == 0:
                raise ValueError('<size> is required when <draws> is empty')
            size = len(next(iter(draws.values())))
        n_draws = size
        missing = [a for a in conditioning if a not in draws]
        if len(missing) > 0:
            raise ModelError(f'{factor} needs draws of {missing} first')

        if len(conditioning) > 0:
            keys = np.column_stack([draws[a] for a in conditioning])
            unique, inverse = np.unique(keys, axis=0, return_inverse=True)
            inverse = np.asarray(inverse).reshape(-1)
        else:
            unique, inverse = np.zeros((1, 0), dtype=int), np.zeros(n_draws, dtype=int)
        target_shape = [self.states(a) for a in target]
        flat = np.empty(n_draws, dtype=int)
        for k, key in enumerate(unique):
            state = dict(zip(conditioning, key))
            index = tuple(
                slice(None) if a in factor.target else (int(state[a]) if a in state else 0) for a in axes
            )
            probabilities = np.asarray(table[index]).reshape(-1)
            total = probabilities.sum()
            if total <= 0:
                raise ZeroProbabilityConditioning(f'{factor} is undefined at conditioning state {state}')
            rows = np.flatnonzero(inverse == k)
            flat[rows] = rng.choice(len(probabilities), size=len(rows), p=probabilities / total)
        states = np.unravel_index(flat, target_shape)
        return {a: s.astype(int) for a, s in zip(target, states)}


def _as_series(axes, table, nodes, model):
    nodes = [a for a in axes if a in nodes]
    index = list(itertools.product(*(range(model.states(a)) for a in nodes)))
    if len(nodes) == 1:
        index = pd.Index([i[0] for i in index], name=nodes[0])
    else:
        index = pd.MultiIndex.from_tuples(index, names=nodes)
    return pd.Series(np.asarray(table).reshape(-1), index=index, name='probability')


def enumerate_posterior(model, targets, evidence=None):
    """
    Exact conditional distribution of `targets` given `evidence` by summing the full joint.

    Parameters
    ----------
    model : DiscreteModel
    targets : iterable of str
    evidence : dict, optional
        {node: state} for any subset of nodes.

    Returns
    -------
    pd.Series
        Probabilities indexed by target states (a MultiIndex for several targets).

    Raises
    ------
    StateSpaceTooLarge
        If the free nodes have more than MAX_STATES joint states.
    ZeroProbabilityConditioning
        If the evidence has probability zero.
    """

    evidence = dict(evidence or {})
    targets = model.dag.node_set(targets)
    clash = targets & set(evidence)
    if len(clash) > 0:
        raise ValueError(f'targets are also in the evidence: {sorted_nodes(clash)}')
    axes, joint = model.joint(evidence)
    drop = tuple(i for i, a in enumerate(axes) if a not in targets)
    marginal = joint.sum(axis=drop)
    total = marginal.sum()
    if total <= 0:
        raise ZeroProbabilityConditioning(f'evidence {evidence} has probability zero')
    return _as_series(axes, marginal / total, targets, model)


def brute_force_ci(model, a, b, z=(), tol=1e-10):
    """
    Test a independent of b given z numerically from the full joint.

    Returns
    -------
    bool
        True when p(a, b | z) = p(a | z) p(b | z) within `tol` for every z state of positive probability.

    Raises
    ------
    OverlappingSets
        If a, b and z are not pairwise disjoint.
    """

    a, b, z = SeparationQuery(a, b, z).validated(model.dag)
    axes, joint = model.joint()
    keep = a | b | z
    table = joint.sum(axis=tuple(i for i, v in enumerate(axes) if v not in keep), keepdims=True)
    axis = lambda nodes: tuple(i for i, v in enumerate(axes) if v in nodes)
    p_z = table.sum(axis=axis(a | b), keepdims=True)
    p_az = table.sum(axis=axis(b), keepdims=True)
    p_bz = table.sum(axis=axis(a), keepdims=True)
    # p(a, b | z) - p(a | z) p(b | z) scaled by p(z) squared
    difference = np.abs(table * p_z - p_az * p_bz)
    return bool(np.all(difference <= tol * p_z ** 2))


def module_posterior_factor(module):
    return CutFactor(
        target=module.theta,
        conditioning=module.x,
        source_module=module.label,
        kind=FactorKind.MODULE_POSTERIOR,
        likelihood=module.theta | module.xstar,
    )


def kl_cut_oracle(model, mod_a, mod_b, evidence, method='exact', resolution=1e-4):
    """
    Distribution f over Theta_{B minus A} that minimises KL(p_f || p(X, .)), where
    p_f(Theta) = p_A(Theta_A | X_A) f(Theta_{B minus A} | Theta_{A and B}).

    For each shared state c the objective separates, giving
    f(b | c) proportional to exp(sum_a p_A(a | c) log g(a, c, b)) with g the joint density of the data and
    the module parameters (parameters outside both modules integrate out).

    Parameters
    ----------
    model : DiscreteModel
    mod_a, mod_b : ModuleSet
    evidence : dict
        Observed state of every observable.
    method : str, optional
        'exact' (default) uses the closed form; 'grid' minimises the objective over a grid of candidate
        distributions, which requires Theta_{B minus A} to be a single binary parameter.
    resolution : float, optional
        Grid step for method='grid' (default=1e-4).

    Returns
    -------
    np.ndarray
        f over the parameter axes, varying along Theta_{B minus A} and Theta_{A and B} only. A model with
        Theta_{B minus A} empty gives an array of ones.
    """

    if method not in ('exact', 'grid'):
        raise ValueError(f'<method> must be \'exact\' or \'grid\', {method!r} was passed')
    dag = model.dag
    axes = model.parameter_axes
    shape = [model.states(a) for a in axes]
    rest = mod_b.theta - mod_a.theta
    if len(rest) == 0:
        return np.ones([1] * len(axes))
    shared = mod_a.theta & mod_b.theta
    own = mod_a.theta - mod_b.theta

    observed = model._observed(evidence)
    complement = dag.parameters - mod_a.theta - mod_b.theta
    model._check_size(axes)
    with np.errstate(divide='ignore'):
        log_g = sum(
            np.log(model.term(node, axes, observed)) for node in dag.nodes if node not in complement
        )
    log_g = np.broadcast_to(log_g, shape)

    p_a = np.broadcast_to(model.factor_table(module_posterior_factor(mod_a), evidence), shape)
    index = lambda nodes: tuple(i for i, a in enumerate(axes) if a in nodes)
    p_c = p_a.sum(axis=index(own), keepdims=True)
    with np.errstate(invalid='ignore', divide='ignore'):
        p_a_given_c = np.where(p_c > 0, p_a / p_c, 0)
        weighted = np.where(p_a_given_c > 0, p_a_given_c * log_g, 0)
    # one slice per (shared, rest) state, averaged over the parameters outside rest and shared
    score = weighted.sum(axis=index(own), keepdims=True)
    other = index(set(axes) - rest - shared - own)
    if len(other) > 0:
        score = score.mean(axis=other, keepdims=True)

    target = index(rest)
    if method == 'exact':
        top = score.max(axis=target, keepdims=True)
        weights = np.exp(score - top)
        return weights / weights.sum(axis=target, keepdims=True)

    if len(rest) != 1 or model.states(next(iter(rest))) != 2:
        raise ValueError('the grid oracle needs a single binary parameter outside module A')
    grid = np.linspace(0, 1, int(round(1 / resolution)) + 1)
    low, high = (np.take(score, [k], axis=target[0]) for k in (0, 1))
    with np.errstate(invalid='ignore', divide='ignore'):
        entropy = np.where(grid > 0, grid * np.log(grid), 0) + np.where(grid < 1, (1 - grid) * np.log(1 - grid), 0)
    objective = entropy - (1 - grid) * low[..., None] - grid * high[..., None]
    best = grid[np.argmin(objective, axis=-1)]
    return np.concatenate([1 - best, best], axis=target[0])


def total_variation(first, second, weights=None):
    """
    Total variation distance between two conditional tables, maximised over the conditioning states that carry
    positive weight.
    """

    first, second = np.broadcast_arrays(np.asarray(first, float), np.asarray(second, float))
    difference = np.abs(first - second)
    if weights is not None:
        difference = np.where(np.broadcast_to(weights, difference.shape) > 0, difference, 0)
    return float(difference.max())


def random_discrete_model(rng, dag=None, **kwargs):
    """
    Random discrete model with Dirichlet-drawn probability tables.

    Parameters
    ----------
    rng : numpy.random.Generator
    dag : Dag, optional
        Graph to attach tables to; by default a random DAG from `random_dag`.
    kwargs
        states : int, optional
            Number of states of every node (default=2).
        concentration : float, optional
            Dirichlet concentration of the table rows (default=1).
        n_nodes, min_nodes, max_nodes, edge_probability, observable_probability
            Passed to `random_dag` when `dag` is None (defaults: 4 to 6 nodes).

    Returns
    -------
    DiscreteModel
    """

    states = kwargs.pop('states', 2)
    concentration = kwargs.pop('concentration', 1.)
    if dag is None:
        kwargs.setdefault('min_nodes', 4)
        kwargs.setdefault('max_nodes', 6)
        dag = random_dag(rng, **kwargs)
    else:
        assert len(kwargs) == 0, f'unrecognized arguments passed in: {", ".join(kwargs.keys())}'

    tables = {}
    for node in dag.nodes:
        parents = tuple(sorted_nodes(dag.parents(node)))
        rows = rng.dirichlet(np.full(states, concentration), size=states ** len(parents))
        tables[node] = CategoricalTable(states, parents, rows.reshape((states,) * len(parents) + (states,)))
    return DiscreteModel(dag, tables)
