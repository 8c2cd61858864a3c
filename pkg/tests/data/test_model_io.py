import json

import pytest

from cutgraph.data import (
    MODEL_ALIASES, SCHEMA, ModelSpec, build_executable, bundled_models, flat_name, flatten, load_model, parse_model,
    resolve_references, serialize_model, validate_schema
)
from cutgraph.errors import (
    DuplicateEdge, ModelError, ModelSyntaxError, PlateBoundError, SchemaViolation, UnresolvedReference,
    UnsupportedFamily
)
from cutgraph.stats import ContinuousModel, DiscreteModel, LinGaussModel, enumerate_posterior


def _document(**fields):
    document = {'schema': 1, 'nodes': [{'name': 'X', 'kind': 'observable'}]}
    document.update(fields)
    return json.dumps(document)


def _violation_path(text):
    with pytest.raises(SchemaViolation) as error:
        parse_model(text)
    return error.value.path


def test_schema_violations():
    assert _violation_path('[]') == '$'
    assert _violation_path('{"schema": 1}') == '$'
    assert _violation_path(_document(colour='red')) == '$'
    assert _violation_path(_document(schema=2)) == '$.schema'
    assert _violation_path(_document(schema=True)) == '$.schema'
    assert _violation_path(_document(constants={'T': True})) == '$.constants.T'
    assert _violation_path(_document(constants={'T': '5'})) == '$.constants.T'
    assert _violation_path(_document(plates={'i': [1]})) == '$.plates.i'
    assert _violation_path(_document(plates={'i': [1, 2.5]})) == '$.plates.i[1]'
    assert _violation_path(_document(nodes=[{'name': 'X', 'kind': 'latent'}])) == '$.nodes[0].kind'
    assert _violation_path(_document(nodes=[{'name': 'X_1', 'kind': 'parameter'}])) == '$.nodes[0].name'
    assert _violation_path(_document(nodes=[{'kind': 'parameter'}])) == '$.nodes[0]'
    assert _violation_path(_document(edges=[{'from': 'a', 'to': 'X['}])) == '$.edges[0].to'
    assert _violation_path(_document(edges=[{'from': 'a[*]', 'to': 'X'}])) == '$.edges[0].from'
    assert _violation_path(_document(edges=[{'from': 'a', 'to': 'X', 'weight': 1}])) == '$.edges[0]'
    assert _violation_path(_document(data={'X': 'high'})) == '$.data.X'
    assert _violation_path(_document(simulation={'kind': 'ar1'})) == '$.simulation.kind'


def test_syntax_error():
    with pytest.raises(ModelSyntaxError) as error:
        parse_model('{\n  "schema": 1,\n}')
    assert error.value.line == 3
    assert 'line 3' in str(error.value)


def test_parse_and_serialize():
    spec = parse_model(_document(name='single', data={'X': 1}))
    assert spec == ModelSpec(nodes=[{'name': 'X', 'kind': 'observable'}], name='single', data={'X': 1})

    salmonella = load_model('salmonella')
    text = serialize_model(salmonella)
    assert text.endswith('\n')
    assert json.loads(text)['schema'] == 1
    assert parse_model(text) == salmonella
    assert serialize_model(parse_model(text)) == text


def test_bundled_models():
    assert bundled_models() == ['appendix_b', 'figure1', 'longitudinal', 'salmonella']
    assert load_model('salmonella.json') == load_model('salmonella')
    assert load_model('figure1').name == 'figure1'
    for alias, name in MODEL_ALIASES.items():
        assert load_model(alias) == load_model(name)
        assert load_model(f'{alias}.json') == load_model(name)
    with pytest.raises(FileNotFoundError):
        load_model('no_such_model')


def test_load_model_from_path(tmp_path):
    path = tmp_path / 'single.json'
    path.write_text(_document(name='single'), encoding='utf-8')
    assert load_model(str(path)).name == 'single'


def test_flat_name():
    assert flat_name('beta') == 'beta'
    assert flat_name('X', [1, 2, 3]) == 'X_1_2_3'


def test_flatten_salmonella():
    flat = flatten(load_model('salmonella'))
    counts = {}
    for node in flat.dag.nodes:
        base = node.split('_')[0]
        counts[base] = counts.get(base, 0) + 1
    assert counts == {'r': 12, 'L': 4, 'a': 2, 'q': 3, 'C': 6, 'X': 12}
    assert len(flat.dag.edges) == 54
    assert flat.dag.parents('C_2_1') == {'r_1_2_1', 'r_2_2_1', 'L_1_1', 'L_2_1', 'a_1', 'a_2', 'q_2'}
    assert flat.partition['B'] == frozenset(f'C_{s}_{t}' for s in (1, 2, 3) for t in (1, 2))
    assert flat.reliability == ('A', 'B')
    assert flat.data['C_3_2'] == 29
    assert flat.data['X_2_1_2'] == 17

    within, = flat.within
    assert within.module == 'B'
    assert within.prior_only_params == frozenset({'L_1_1', 'L_1_2', 'L_2_1', 'L_2_2'})

    # the dirichlet groups collect the shares of one (i, t) pair
    assert flat.distributions['r_1_2_1']['group'] == ['r_1_1_1', 'r_1_2_1', 'r_1_3_1']
    rate = flat.distributions['C_2_1']['rate']
    assert len(rate['sum']) == 2
    assert rate['sum'][0] == {'product': ['L_1_1', 'r_1_2_1', 'a_1', 'q_2']}


def test_flatten_misclassification():
    flat = flatten(load_model('misclassification'))
    assert len(flat.dag) == 25
    assert len(flat.dag.observables) == 18
    assert flat.dag.is_observable('W_5')
    assert not flat.dag.is_observable('W_4')
    assert flat.partition['B'] == frozenset({'C_5', 'C_6', 'W_5', 'W_6', 'Z_5', 'Z_6'})
    assert flat.reliability == ('B', 'A')

    smaller = flatten(load_model('misclassification'), {'m': 2, 'n': 3})
    assert len(smaller.dag) == 14
    assert smaller.partition['B'] == frozenset({'C_3', 'W_3', 'Z_3'})


def test_flatten_longitudinal():
    flat = flatten(load_model('longitudinal'))
    assert len(flat.dag) == 15
    assert len(flat.dag.edges) == 14
    assert flat.dag.parents('X_1') == {'a_1', 'theta_1'}
    assert flat.dag.parents('X_4') == {'a_4', 'theta_4', 'theta_3'}
    assert list(flat.partition) == ['M_1', 'M_2', 'M_3', 'M_4', 'M_5']
    assert flat.partition['M_3'] == frozenset({'X_3'})
    assert flat.reliability == ('M_1', 'M_2', 'M_3', 'M_4', 'M_5')
    assert flat.constants['T'] == 5

    shorter = flatten(load_model('longitudinal'), {'T': 3})
    assert len(shorter.dag) == 9
    assert shorter.constants['T'] == 3


def test_flatten_errors():
    observable = {'name': 'X', 'kind': 'observable', 'index': ['i']}
    with pytest.raises(PlateBoundError):
        flatten(ModelSpec(nodes=[observable], plates={'i': [1, 'N']}))
    with pytest.raises(PlateBoundError):
        flatten(ModelSpec(nodes=[observable], plates={'i': [3, 1]}))
    with pytest.raises(PlateBoundError):
        flatten(ModelSpec(nodes=[observable], constants={'N': 2.5}, plates={'i': [1, 'N']}))
    with pytest.raises(UnresolvedReference):
        flatten(ModelSpec(nodes=[observable]))

    nodes = [{'name': 'mu', 'kind': 'parameter'}, {'name': 'X', 'kind': 'observable'}]
    with pytest.raises(UnresolvedReference):
        flatten(ModelSpec(nodes=nodes, edges=[{'from': 'nu', 'to': 'X'}]))
    with pytest.raises(UnresolvedReference):
        flatten(ModelSpec(nodes=nodes, partition={'A': ['X']}, reliability=['B']))
    with pytest.raises(UnresolvedReference):
        flatten(ModelSpec(nodes=nodes, data={'Y': 1}))
    with pytest.raises(ModelError):
        flatten(ModelSpec(nodes=nodes, data={'mu': 1}))


def test_resolve_references():
    flat = flatten(load_model('misclassification'))
    assert resolve_references(flat, ['W[*]']) == {f'W_{i}' for i in range(1, 7)}
    assert resolve_references(flat, ['Z_5', 'Z[6]', 'beta']) == {'Z_5', 'Z_6', 'beta'}
    with pytest.raises(UnresolvedReference):
        resolve_references(flat, ['Q[*]'])
    with pytest.raises(UnresolvedReference):
        resolve_references(flat, ['W['])


def test_build_discrete():
    model = build_executable(flatten(load_model('two_block_discrete')))
    assert isinstance(model, DiscreteModel)
    assert model.table('Y').table.shape == (2, 2, 2)
    posterior = enumerate_posterior(model, ['phi'], {'Y': 1, 'Z': 1})
    assert posterior.loc[1] == pytest.approx(.21 / .72)


def test_build_continuous():
    flat = flatten(load_model('salmonella'))
    model = build_executable(flat)
    assert isinstance(model, ContinuousModel)
    assert model.dag == flat.dag


def test_build_longitudinal():
    flat = flatten(load_model('longitudinal'), {'T': 3})
    model = build_executable(flat, seed=4)
    assert isinstance(model, LinGaussModel)
    assert model.T == 3
    assert model.n == 100
    assert model.to_dag() == flat.dag
    again = build_executable(flat, seed=4)
    assert (again.X == model.X).all()


def test_build_errors():
    with pytest.raises(ModelError):
        build_executable(flatten(load_model('misclassification')))

    nodes = [
        {'name': 'mu', 'kind': 'parameter', 'distribution': {'family': 'weibull', 'shape': 1}},
        {'name': 'X', 'kind': 'observable', 'distribution': {'family': 'normal', 'mean': 'mu', 'sd': 1}},
    ]
    edges = [{'from': 'mu', 'to': 'X'}]
    with pytest.raises(UnsupportedFamily):
        build_executable(flatten(ModelSpec(nodes=nodes, edges=edges)))

    nodes[0]['distribution'] = {'family': 'categorical', 'states': 2, 'table': [.5, .5]}
    with pytest.raises(UnsupportedFamily):
        build_executable(flatten(ModelSpec(nodes=nodes, edges=edges)))


def test_schema_document():
    with open(SCHEMA, encoding='utf-8') as f:
        schema = json.load(f)
    assert schema['$schema'].endswith('2020-12/schema')
    assert set(schema['required']) == {'schema', 'nodes'}
    for name in bundled_models():
        validate_schema(load_model(name).to_dict())
    with pytest.raises(SchemaViolation):
        validate_schema({'schema': 1, 'nodes': [], 'partition': {'A': 'X'}})


def test_duplicate_edge_templates():
    nodes = [{'name': 'mu', 'kind': 'parameter', 'index': ['i']}, {'name': 'X', 'kind': 'observable'}]
    # the two templates expand to the same edge mu_1 -> X
    edges = [{'from': 'mu[i]', 'to': 'X'}, {'from': 'mu[1]', 'to': 'X'}]
    with pytest.raises(DuplicateEdge):
        flatten(ModelSpec(nodes=nodes, edges=edges, plates={'i': [1, 2]}))


def test_unusable_table():
    spec = load_model('appendix_b')
    spec.nodes[0]['distribution']['table'] = ['half', 'half']
    with pytest.raises(ModelError) as error:
        build_executable(flatten(spec))
    assert 'cannot be executed' in str(error.value)

    spec = load_model('appendix_b')
    spec.nodes[2]['distribution']['states'] = 'two'
    with pytest.raises(ModelError):
        build_executable(flatten(spec))
