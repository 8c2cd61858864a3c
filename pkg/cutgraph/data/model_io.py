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
Model files.

A model file is a JSON document describing a plated DAG: plates (inclusive index ranges), node templates with a kind
and an optional distribution, edge templates, the partition of observables into blocks, the reliability order of the
blocks, within-module cut declarations and observed data. Flattening expands every plate and names the resulting
nodes `base`, `base_i` or `base_i_j`, so the graph engines never see a plate.

References to nodes use `base[index, ...]`, where each index is an integer, a plate variable, a plate variable plus
or minus an integer, or `*` (any value, only allowed where a set of nodes is expected).
"""

import functools
import itertools
import json
import logging
import os
import re
from dataclasses import dataclass, field
from typing import NamedTuple

import jsonschema
import numpy as np

from cutgraph.errors import (
    CutGraphError, ModelError, ModelSyntaxError, PlateBoundError, SchemaViolation, UnresolvedReference,
    UnsupportedFamily
)
from cutgraph.graph.dag import Dag, sorted_nodes
from cutgraph.helper.seeding import spawn_rng
from cutgraph.modules.construction import check_partition, construct_module
from cutgraph.modules.factorization import WithinModuleCutSpec
from cutgraph.stats.continuous import FAMILIES, ContinuousModel, Distribution
from cutgraph.stats.discrete import CategoricalTable, DiscreteModel
from cutgraph.stats.gaussian import LinGaussModel

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODELS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'models')

SCHEMA = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'model.schema.json')

# descriptive names of the bundled models
MODEL_ALIASES = {'misclassification': 'figure1', 'two_block_discrete': 'appendix_b'}

REFERENCE = re.compile(r'^\s*([A-Za-z][A-Za-z0-9]*)\s*(?:\[([^\[\]]*)\])?\s*$')
INDEX_TERM = re.compile(
    r'^(?:(?P<number>\d+)|(?P<variable>[A-Za-z][A-Za-z0-9]*)\s*(?:(?P<sign>[+-])\s*(?P<shift>\d+))?)$'
)


# --------------------------------------------------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------------------------------------------------
@dataclass
class ModelSpec:
    """
    Parsed, schema-checked model file. Fields keep the JSON structure; `flatten` does the expansion.
    """

    nodes: list
    name: str = 'model'
    constants: dict = field(default_factory=dict)
    plates: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)
    partition: dict = field(default_factory=dict)
    reliability: list = field(default_factory=list)
    within: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'schema': SCHEMA_VERSION,
            'name': self.name,
            'constants': self.constants,
            'plates': self.plates,
            'nodes': self.nodes,
            'edges': self.edges,
            'partition': self.partition,
            'reliability': self.reliability,
            'within': self.within,
            'data': self.data,
            'simulation': self.simulation,
        }


@functools.lru_cache(maxsize=None)
def _validator():
    with open(SCHEMA, encoding='utf-8') as f:
        schema = json.load(f)
    validator = jsonschema.validators.validator_for(schema)
    validator.check_schema(schema)
    return validator(schema)


def _json_path(error):
    path = '$'
    for part in error.absolute_path:
        path += f'[{part}]' if isinstance(part, int) else f'.{part}'
    return path


def validate_schema(document):
    """
    Check a decoded model document against the schema document `model.schema.json`.

    Raises
    ------
    SchemaViolation
        With the JSON path of the most relevant offending value (the one nearest to the root).
    """

    error = jsonschema.exceptions.best_match(_validator().iter_errors(document))
    if error is not None:
        raise SchemaViolation(_json_path(error), error.message)


def parse_model(text):
    """
    Parse a model file.

    Parameters
    ----------
    text : str
        JSON document (schema version 1).

    Returns
    -------
    ModelSpec

    Raises
    ------
    ModelSyntaxError
        If the text is not JSON; carries the line and column of the problem.
    SchemaViolation
        If the document does not follow the schema.
    """

    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ModelSyntaxError(error.msg, error.lineno, error.colno) from None
    validate_schema(document)
    fields = {key: value for key, value in document.items() if key != 'schema'}
    return ModelSpec(**fields)


def serialize_model(spec):
    """Canonical JSON text of a spec: sorted keys, two-space indent, trailing newline."""

    return json.dumps(spec.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def load_model(name):
    """
    Parse a model from a file path or from the bundled models ('salmonella' or 'salmonella.json'). The bundled
    models also answer to the names in `MODEL_ALIASES`.
    """

    path = name
    if not os.path.isfile(path):
        stem = name[:-5] if name.endswith('.json') else name
        bundled = os.path.join(MODELS, f'{MODEL_ALIASES.get(stem, stem)}.json')
        if not os.path.isfile(bundled):
            raise FileNotFoundError(f'no model file \'{name}\' and no bundled model of that name')
        path = bundled
    with open(path, encoding='utf-8') as f:
        return parse_model(f.read())


def bundled_models():
    return sorted(name[:-5] for name in os.listdir(MODELS) if name.endswith('.json'))


# --------------------------------------------------------------------------------------------------------------------
# Flattening
# --------------------------------------------------------------------------------------------------------------------
class FlatModel(NamedTuple):
    """
    A model file with every plate expanded.

    distributions maps node names to their resolved distribution objects (references replaced by node names,
    constants by numbers); partition maps block labels to observables; within holds WithinModuleCutSpec entries.
    """

    name: str
    dag: Dag
    distributions: dict
    partition: dict
    reliability: tuple
    within: tuple
    data: dict
    simulation: dict
    constants: dict

    def modules(self):
        """Minimal self-contained module for every block of the partition."""

        return {label: construct_module(self.dag, label, block) for label, block in self.partition.items()}


def flat_name(base, indices=()):
    return '_'.join([base] + [str(i) for i in indices])


class _Resolver:

    def __init__(self, spec, constants):
        self.constants = dict(spec.constants)
        self.constants.update(constants or {})
        self.plates = {}
        for variable, (lower, upper) in spec.plates.items():
            lower, upper = self.bound(lower, variable), self.bound(upper, variable)
            if upper < lower:
                raise PlateBoundError(f'plate \'{variable}\' runs from {lower} down to {upper}')
            self.plates[variable] = range(lower, upper + 1)

    def bound(self, bound, variable):
        if isinstance(bound, int):
            return bound
        match = re.match(r'^\s*([A-Za-z][A-Za-z0-9]*)\s*(?:([+-])\s*(\d+))?\s*$', bound)
        if match is None or match.group(1) not in self.constants:
            raise PlateBoundError(f'bound {bound!r} of plate \'{variable}\' is not a constant expression')
        value = self.constants[match.group(1)]
        if not float(value).is_integer():
            raise PlateBoundError(f'constant \'{match.group(1)}\' bounding plate \'{variable}\' is not an integer')
        shift = 0 if match.group(2) is None else int(match.group(3)) * (1 if match.group(2) == '+' else -1)
        return int(value) + shift

    def plate(self, variable):
        try:
            return self.plates[variable]
        except KeyError:
            raise UnresolvedReference(f'plate \'{variable}\' is not declared')

    @staticmethod
    def split(reference):
        base, index = REFERENCE.match(reference).groups()
        terms = [] if index is None else [term.strip() for term in index.split(',')]
        return base, terms

    def variables(self, reference):
        """Plate variables a reference mentions, in order of appearance."""

        variables = []
        for term in self.split(reference)[1]:
            match = INDEX_TERM.match(term)
            if match is not None and match.group('variable') is not None:
                variable = match.group('variable')
                if variable in self.constants:
                    continue
                self.plate(variable)
                if variable not in variables:
                    variables.append(variable)
        return variables

    def term(self, term, assignment, reference):
        match = INDEX_TERM.match(term)
        if match.group('number') is not None:
            return int(match.group('number'))
        variable = match.group('variable')
        if variable in assignment:
            value = assignment[variable]
        elif variable in self.constants:
            value = int(self.constants[variable])
        else:
            raise UnresolvedReference(f'index variable \'{variable}\' of {reference!r} is not bound')
        shift = 0 if match.group('sign') is None else int(match.group('shift'))
        return value - shift if match.group('sign') == '-' else value + shift

    def name(self, reference, assignment):
        """Flattened name of a reference without wildcards."""

        base, terms = self.split(reference)
        return flat_name(base, [self.term(term, assignment, reference) for term in terms])

    def pattern(self, reference, assignment):
        """Regular expression for a reference that may contain wildcards."""

        base, terms = self.split(reference)
        parts = [re.escape(base)]
        for term in terms:
            parts.append(r'\d+' if term == '*' else str(self.term(term, assignment, reference)))
        return re.compile('^' + '_'.join(parts) + '$')

    def assignments(self, variables):
        ranges = [self.plate(variable) for variable in variables]
        for values in itertools.product(*ranges):
            yield dict(zip(variables, values))

    def matching(self, reference, assignment, nodes):
        if '*' in reference:
            pattern = self.pattern(reference, assignment)
            found = [node for node in nodes if pattern.match(node)]
        else:
            name = self.name(reference, assignment)
            found = [name] if name in nodes else []
        if len(found) == 0:
            raise UnresolvedReference(f'{reference!r} matches no node')
        return found

    def expand(self, references, nodes, assignment=None):
        """Nodes matched by references, expanding plate variables that `assignment` does not bind."""

        assignment = assignment or {}
        result = []
        for reference in references:
            free = [v for v in self.variables(reference) if v not in assignment]
            for extra in self.assignments(free):
                for node in self.matching(reference, {**assignment, **extra}, nodes):
                    if node not in result:
                        result.append(node)
        return result

    def labels(self, label):
        """Flattened block labels of a possibly plated label, with the plate assignment of each."""

        variables = self.variables(label)
        return [(self.name(label, assignment), assignment) for assignment in self.assignments(variables)]

    def expression(self, expression, assignment, nodes):
        if isinstance(expression, bool):
            raise ModelError(f'invalid expression {expression!r}')
        if isinstance(expression, (int, float)):
            return expression
        if isinstance(expression, str):
            if expression in self.constants:
                return self.constants[expression]
            name = self.name(expression, assignment)
            if name not in nodes:
                raise UnresolvedReference(f'{expression!r} resolves to \'{name}\', which is not a node')
            return name
        if isinstance(expression, list):
            return [self.expression(item, assignment, nodes) for item in expression]
        if isinstance(expression, dict) and 'sum_over' in expression:
            variable = expression['sum_over']
            return {'sum': [
                self.expression(expression['term'], {**assignment, variable: value}, nodes)
                for value in self.plate(variable)
            ]}
        if isinstance(expression, dict) and len(expression) == 1:
            (kind, terms), = expression.items()
            return {kind: [self.expression(term, assignment, nodes) for term in terms]}
        raise ModelError(f'invalid expression {expression!r}')

    def distribution(self, distribution, assignment, nodes):
        resolved = {'family': distribution['family']}
        for key, value in distribution.items():
            if key in ('family', 'table', 'states'):
                resolved.setdefault(key, value)
            elif key == 'group':
                resolved['group'] = sorted_nodes(self.matching(value, assignment, nodes))
            elif key == 'parents':
                resolved['parents'] = [self.name(parent, assignment) for parent in value]
            else:
                resolved[key] = self.expression(value, assignment, nodes)
        return resolved


def flatten(spec, constants=None):
    """
    Expand every plate of a spec.

    Parameters
    ----------
    spec : ModelSpec
    constants : dict, optional
        Overrides of the constants declared in the spec (for example a smaller plate size).

    Returns
    -------
    FlatModel

    Raises
    ------
    PlateBoundError
        If a plate bound is not an integer constant expression or a plate is empty.
    UnresolvedReference
        If a reference names an undeclared plate, constant or node.
    CycleDetected, UnknownEndpoint, DuplicateNode, DuplicateEdge, SelfLoop
        From the graph construction.
    NotAPartition, NotObservable
        If the blocks are not a partition of the observables.
    """

    resolver = _Resolver(spec, constants)

    instances = []
    for template in spec.nodes:
        variables = list(template.get('index', []))
        for assignment in resolver.assignments(variables):
            name = flat_name(template['name'], [assignment[v] for v in variables])
            instances.append((name, template, assignment))
    names = [name for name, _, _ in instances]
    known = frozenset(names)

    edges = []
    for edge in spec.edges:
        variables = resolver.variables(edge['from'])
        variables += [v for v in resolver.variables(edge['to']) if v not in variables]
        for assignment in resolver.assignments(variables):
            source, target = resolver.name(edge['from'], assignment), resolver.name(edge['to'], assignment)
            for endpoint in (source, target):
                if endpoint not in known:
                    raise UnresolvedReference(
                        f'edge {edge["from"]} -> {edge["to"]} reaches undeclared node \'{endpoint}\''
                    )
            edges.append((source, target))
    dag = Dag([(name, template['kind']) for name, template, _ in instances], edges)

    distributions = {}
    for name, template, assignment in instances:
        if 'distribution' in template:
            distributions[name] = resolver.distribution(template['distribution'], assignment, known)

    partition = {}
    for label, references in spec.partition.items():
        for flat_label, assignment in resolver.labels(label):
            partition[flat_label] = frozenset(resolver.expand(references, known, assignment))
    if len(partition) > 0:
        check_partition(dag, partition.values())

    reliability = []
    for label in spec.reliability:
        reliability += [flat_label for flat_label, _ in resolver.labels(label)]
    unknown = [label for label in reliability if label not in partition]
    if len(unknown) > 0:
        raise UnresolvedReference(f'reliability order names unknown blocks {unknown}')

    within = []
    for entry in spec.within:
        for flat_label, assignment in resolver.labels(entry['module']):
            within.append(WithinModuleCutSpec(flat_label, resolver.expand(entry['parameters'], known, assignment)))

    data = {}
    for reference, value in spec.data.items():
        name = resolver.name(reference, {})
        if name not in known:
            raise UnresolvedReference(f'data for \'{reference}\', which is not a node')
        if not dag.is_observable(name):
            raise ModelError(f'data given for parameter \'{name}\'')
        data[name] = value

    logger.info('flattened %s into %d nodes and %d edges', spec.name, len(dag), len(dag.edges))
    return FlatModel(
        name=spec.name,
        dag=dag,
        distributions=distributions,
        partition=partition,
        reliability=tuple(reliability),
        within=tuple(within),
        data=data,
        simulation=dict(spec.simulation),
        constants=resolver.constants,
    )


def resolve_references(flat, references):
    """
    Flattened nodes for user-supplied references such as 'W[*]' or 'Z_5'. Plate variables are not bound, so
    references use integers or wildcards.
    """

    known = frozenset(flat.dag.nodes)
    result = []
    for reference in references:
        if reference in known:
            result.append(reference)
            continue
        if REFERENCE.match(reference) is None:
            raise UnresolvedReference(f'malformed node reference {reference!r}')
        base, terms = _Resolver.split(reference)
        parts = [re.escape(base)] + [r'\d+' if term == '*' else re.escape(term) for term in terms]
        pattern = re.compile('^' + '_'.join(parts) + '$')
        found = [node for node in flat.dag.nodes if pattern.match(node)]
        if len(found) == 0:
            raise UnresolvedReference(f'{reference!r} matches no node')
        result += [node for node in found if node not in result]
    return frozenset(result)


# --------------------------------------------------------------------------------------------------------------------
# Executable models
# --------------------------------------------------------------------------------------------------------------------
def _categorical(flat, node, distribution):
    states = int(distribution.get('states', 2))
    parents = tuple(distribution.get('parents', ()))
    for parent in parents:
        if parent not in flat.distributions or flat.distributions[parent]['family'] != 'categorical':
            raise UnsupportedFamily(f'parent \'{parent}\' of categorical node \'{node}\' is not categorical')
    shape = tuple(int(flat.distributions[p].get('states', 2)) for p in parents) + (states,)
    table = np.asarray(distribution.get('table'), dtype=float)
    if table.size != np.prod(shape):
        raise ModelError(f'table of \'{node}\' has {table.size} entries, {int(np.prod(shape))} expected')
    # rows enumerate parent states with the last parent varying fastest
    return CategoricalTable(states, parents, table.reshape(shape))


def _lingauss(flat, seed):
    settings = dict(flat.simulation)
    settings.pop('kind')
    T = int(settings.pop('T', flat.constants.get('T', 0)))
    n = int(settings.pop('n', 100))
    offset = float(settings.pop('offset', 0.))
    if len(settings) > 0:
        raise SchemaViolation('$.simulation', f'unknown settings {sorted(settings)}')
    model = LinGaussModel.simulate(T, n, spawn_rng(seed, 0), offset=offset)
    if model.to_dag() != flat.dag:
        raise ModelError('the graph of the model file is not the longitudinal graph a_t, theta_t -> X_t')
    return model


def build_executable(flat, seed=0):
    """
    Executable model for a flattened spec.

    Parameters
    ----------
    flat : FlatModel
    seed : int, optional
        Seed for simulated data sets (default=0).

    Returns
    -------
    DiscreteModel, ContinuousModel or LinGaussModel

    Raises
    ------
    UnsupportedFamily
        If a node has a family no engine evaluates, or categorical and continuous families are mixed.
    ModelError
        If the model is symbolic only (some node has no distribution) or a table or setting of the model file is not
        usable.
    """

    try:
        return _executable(flat, seed)
    except CutGraphError:
        raise
    except (TypeError, ValueError) as error:
        raise ModelError(f'model \'{flat.name}\' cannot be executed: {error}') from error


def _executable(flat, seed):
    if len(flat.simulation) > 0:
        return _lingauss(flat, seed)

    missing = [node for node in flat.dag.nodes if node not in flat.distributions]
    if len(missing) > 0:
        raise ModelError(f'model \'{flat.name}\' is symbolic: no distribution for {", ".join(missing[:5])}'
                         + (', ...' if len(missing) > 5 else ''))
    families = {distribution['family'] for distribution in flat.distributions.values()}
    unknown = families - set(FAMILIES) - {'categorical'}
    if len(unknown) > 0:
        raise UnsupportedFamily(f'no engine evaluates the families {sorted(unknown)}')

    if families == {'categorical'}:
        tables = {node: _categorical(flat, node, d) for node, d in flat.distributions.items()}
        return DiscreteModel(flat.dag, tables)
    if 'categorical' in families:
        raise UnsupportedFamily('categorical nodes cannot be mixed with continuous families')
    distributions = {}
    for node, resolved in flat.distributions.items():
        params = {key: value for key, value in resolved.items() if key not in ('family', 'group')}
        distributions[node] = Distribution(resolved['family'], params, tuple(resolved.get('group', ())))
    return ContinuousModel(flat.dag, distributions)
