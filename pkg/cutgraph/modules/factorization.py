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
Cut distributions as ordered lists of conditional factors.

A factor is held extensionally: the parameters it is a distribution over (target), what it conditions on, and the
nodes whose p(v | pa(v)) terms make up its unnormalised density (likelihood). Parameters reached by the likelihood
but neither targeted nor conditioned on are marginalised. Factors are kept in sampling order: every conditioning
parameter is the target of an earlier factor or a parent of the factor's own target.
"""

import enum
import logging
from dataclasses import dataclass, field, replace

from cutgraph.errors import ModelError, ParamNotInModule, UnresolvedTie
from cutgraph.graph.dag import node_sort_key, sorted_nodes
from cutgraph.modules.ordering import OrderingGraph, OrderRelation, two_module_graph

logger = logging.getLogger(__name__)

COMPLEMENT_LABEL = 'complement'


class FactorKind(enum.Enum):
    MODULE_POSTERIOR = 'ModulePosterior'
    CONDITIONAL = 'ConditionalPosterior'
    MARGINAL_POSTERIOR = 'MarginalPosterior'
    PRIOR_ONLY = 'PriorOnly'
    COMPLEMENT = 'ComplementConditional'


@dataclass(frozen=True)
class CutFactor:
    target: frozenset
    conditioning: frozenset
    source_module: str
    kind: FactorKind
    likelihood: frozenset = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, 'target', frozenset(self.target))
        object.__setattr__(self, 'conditioning', frozenset(self.conditioning))
        likelihood = self.target if self.likelihood is None else self.likelihood
        object.__setattr__(self, 'likelihood', frozenset(likelihood))

    def nuisance(self, dag):
        """Parameters the factor marginalises over."""

        reached = self.likelihood | dag.parents(self.likelihood)
        return frozenset(v for v in reached if dag.is_parameter(v)) - self.target - self.conditioning

    def __str__(self):
        name = f'p_{self.source_module}' if self.kind is FactorKind.MODULE_POSTERIOR else 'p'
        target = ', '.join(sorted_nodes(self.target))
        if len(self.conditioning) == 0:
            return f'{name}({target})'
        return f'{name}({target} | {", ".join(sorted_nodes(self.conditioning))})'

    def to_dict(self):
        return {
            'target': sorted_nodes(self.target),
            'conditioning': sorted_nodes(self.conditioning),
            'source_module': self.source_module,
            'kind': self.kind.value,
            'likelihood': sorted_nodes(self.likelihood),
        }


@dataclass(frozen=True)
class CutFactorization:
    factors: tuple
    label: str = 'cut'

    def __post_init__(self):
        object.__setattr__(self, 'factors', tuple(self.factors))

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def __getitem__(self, item):
        return self.factors[item]

    def __str__(self):
        return ' '.join(str(factor) for factor in reversed(self.factors))

    @property
    def targets(self):
        return frozenset().union(*(f.target for f in self.factors))

    def factor_for(self, parameter):
        for factor in self.factors:
            if parameter in factor.target:
                return factor
        raise KeyError(parameter)

    def to_dict(self):
        return {
            'label': self.label,
            'display': str(self),
            'factors': [factor.to_dict() for factor in self.factors],
        }

    def validate(self, dag):
        """
        Check that targets partition the parameters of `dag` and that conditioning sets only look back.

        Raises
        ------
        ModelError
        """

        seen = set()
        for factor in self.factors:
            overlap = seen & factor.target
            if len(overlap) > 0:
                raise ModelError(f'parameters targeted by more than one factor: {sorted_nodes(overlap)}')
            allowed = seen | dag.observables | dag.parents(factor.target)
            forward = factor.conditioning - allowed
            if len(forward) > 0:
                raise ModelError(f'{factor} conditions on {sorted_nodes(forward)} before they are targeted')
            seen |= factor.target
        missing = dag.parameters - seen
        if len(missing) > 0:
            raise ModelError(f'parameters not covered by any factor: {sorted_nodes(missing)}')


@dataclass(frozen=True)
class WithinModuleCutSpec:
    """
    Parameters of `module` that are inferred from their prior alone.
    """

    module: str
    prior_only_params: frozenset

    def __post_init__(self):
        object.__setattr__(self, 'prior_only_params', frozenset(self.prior_only_params))


def cut_subgraph(dag, psi0):
    """
    Remove every edge entering `psi0` from outside it.
    """

    psi0 = dag.node_set(psi0)
    removed = [(source, target) for source, target in dag.edges if target in psi0 and source not in psi0]
    logger.debug('cut-sub-graph removes %s', removed)
    return dag.without_edges(removed)


def complement_factor(dag, modules):
    covered = frozenset().union(*(m.variables for m in modules))
    complement = dag.parameters - covered
    if len(complement) == 0:
        return None
    return CutFactor(
        target=complement,
        conditioning=dag.parents(complement),
        source_module=COMPLEMENT_LABEL,
        kind=FactorKind.COMPLEMENT,
        likelihood=complement,
    )


def _with_complement(dag, modules, factors, label):
    factor = complement_factor(dag, modules)
    if factor is not None:
        factors.append(factor)
    return CutFactorization(tuple(factors), label)


def cut_general(dag, modules, ordering, label=None):
    """
    Cut distribution for modules arranged by an ordering graph.

    Every module M contributes p(Theta_M minus an(M) | X_M, Theta_M within an(M)), where an(M) is the union of the
    variables of its ancestor modules; modules whose parameters are all covered upstream contribute nothing. The
    conditional for parameters outside every module comes last.

    Parameters
    ----------
    dag : Dag
    modules : iterable of ModuleSet
    ordering : OrderingGraph
        Nodes must be the module labels.

    Returns
    -------
    CutFactorization

    Raises
    ------
    ModelError
        If two unordered modules claim the same parameters.
    """

    modules = {m.label: m for m in modules}
    if set(modules) != set(ordering.nodes):
        raise ModelError(f'ordering graph nodes {list(ordering.nodes)} do not match modules {sorted(modules)}')

    factors = []
    for name in ordering.topological_order():
        module = modules[name]
        upstream = frozenset().union(*(modules[a].variables for a in ordering.ancestors(name)))
        target = module.theta - upstream
        if len(target) == 0:
            logger.debug('module %s has no parameters left after its ancestors', name)
            continue
        inherited = module.theta & upstream
        factors.append(CutFactor(
            target=target,
            conditioning=module.x | inherited,
            source_module=name,
            kind=FactorKind.CONDITIONAL if len(inherited) > 0 else FactorKind.MODULE_POSTERIOR,
            likelihood=target | module.xstar,
        ))
    cf = _with_complement(dag, modules.values(), factors, label or f'cut[{ordering.describe()}]')
    cf.validate(dag)
    logger.debug('cut factorization %s', cf)
    return cf


def cut_two(dag, mod_a, mod_b, order):
    """
    Two-module cut distribution.

    With A parent of B, A's parameters come from A's own posterior and B's remaining parameters from their
    conditional given the shared parameters and B's observables, so nothing in B feeds back into A.

    Raises
    ------
    UnresolvedTie
        If `order` is BOTH.
    """

    if order is OrderRelation.BOTH:
        raise UnresolvedTie(f'the order of {mod_a.label} and {mod_b.label} must be resolved before cutting')
    ordering = two_module_graph(mod_a, mod_b, order)
    return cut_general(dag, (mod_a, mod_b), ordering, label=f'cut[{ordering.describe()}]')


def standard_factorization(dag, mod_a, mod_b):
    """
    The standard posterior written over the two-module split: p(Theta_A | X), then
    p(Theta_{B minus A} | Theta_{A and B}, X_B), then the complement conditional. The first factor conditions on all
    of X, which is where feedback from B enters.
    """

    theta_a = mod_a.theta
    rest = mod_b.theta - theta_a
    complement = dag.parameters - mod_a.theta - mod_b.theta
    factors = []
    if len(theta_a) > 0:
        factors.append(CutFactor(
            target=theta_a,
            conditioning=dag.observables,
            source_module=mod_a.label,
            kind=FactorKind.MARGINAL_POSTERIOR,
            likelihood=frozenset(dag.nodes) - complement,
        ))
    if len(rest) > 0:
        factors.append(CutFactor(
            target=rest,
            conditioning=mod_b.x | (mod_b.theta & theta_a),
            source_module=mod_b.label,
            kind=FactorKind.CONDITIONAL,
            likelihood=rest | mod_b.xstar,
        ))
    cf = _with_complement(dag, (mod_a, mod_b), factors, 'standard')
    cf.validate(dag)
    return cf


def apply_within_cut(cf, spec, dag):
    """
    Infer `spec.prior_only_params` from their prior only.

    The module's factor is split in two: the fixed parameters get their prior, with any upstream parameters of the
    same factor marginalised, and the remaining parameters are inferred conditionally on them.

    Parameters
    ----------
    cf : CutFactorization
    spec : WithinModuleCutSpec
    dag : Dag

    Returns
    -------
    CutFactorization

    Raises
    ------
    ParamNotInModule
        If no factor of `spec.module` targets all of the prior-only parameters.
    """

    fixed = dag.node_set(spec.prior_only_params)
    if len(fixed) == 0:
        return cf
    non_parameters = [v for v in fixed if not dag.is_parameter(v)]
    if len(non_parameters) > 0:
        raise ParamNotInModule(f'only parameters can be inferred from the prior: {sorted_nodes(non_parameters)}')

    for position, factor in enumerate(cf.factors):
        if factor.source_module == spec.module and fixed <= factor.target:
            break
    else:
        raise ParamNotInModule(
            f'no factor of module {spec.module} targets {sorted_nodes(fixed)}'
        )

    upstream = dag.ancestors(fixed) & factor.target & dag.parameters
    prior_only = CutFactor(
        target=fixed,
        conditioning=dag.parents(fixed | upstream),
        source_module=spec.module,
        kind=FactorKind.PRIOR_ONLY,
        likelihood=fixed | upstream,
    )
    factors = list(cf.factors[:position]) + [prior_only]
    remaining = factor.target - fixed
    if len(remaining) > 0:
        factors.append(replace(
            factor,
            target=remaining,
            conditioning=factor.conditioning | fixed,
            kind=FactorKind.CONDITIONAL,
        ))
    factors.extend(cf.factors[position + 1:])
    result = CutFactorization(tuple(factors), f'{cf.label}+within[{spec.module}]')
    logger.info('within-module cut on %s: %s', spec.module, sorted(fixed, key=node_sort_key))
    return result
