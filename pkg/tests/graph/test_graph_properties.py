import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cutgraph.data import ModelSpec, flatten, parse_model, serialize_model
from cutgraph.graph import is_d_separated, is_d_separated_by_paths, random_dag

PROPERTY_SETTINGS = settings(
    max_examples=150,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)


@st.composite
def dags(draw, min_nodes=4, max_nodes=30):
    seed = draw(st.integers(min_value=0, max_value=2 ** 32 - 1))
    n_nodes = draw(st.integers(min_value=min_nodes, max_value=max_nodes))
    edge_probability = draw(st.sampled_from([None, .2, .4]))
    observable_probability = draw(st.floats(min_value=.2, max_value=.8))
    return random_dag(
        np.random.default_rng(seed), n_nodes=n_nodes, edge_probability=edge_probability,
        observable_probability=observable_probability
    )


@st.composite
def queries(draw, min_nodes=4, max_nodes=30):
    """A DAG with disjoint node sets A, B (both non-empty) and Z."""

    dag = draw(dags(min_nodes, max_nodes))
    nodes = list(dag.nodes)
    a, b = draw(st.lists(st.sampled_from(nodes), min_size=2, max_size=2, unique=True))
    labels = draw(st.lists(st.integers(min_value=0, max_value=3), min_size=len(nodes), max_size=len(nodes)))
    sets = [{a}, {b}, set()]
    for node, label in zip(nodes, labels):
        if node not in (a, b) and label < 3:
            sets[label].add(node)
    return (dag, *sets)


@PROPERTY_SETTINGS
@given(query=queries())
def test_d_separation_is_symmetric(query):
    dag, a, b, z = query
    assert is_d_separated(dag, a, b, z) == is_d_separated(dag, b, a, z)


@PROPERTY_SETTINGS
@given(query=queries(max_nodes=10))
def test_d_separation_matches_paths(query):
    dag, a, b, z = query
    assert is_d_separated(dag, a, b, z) == is_d_separated_by_paths(dag, a, b, z)


@PROPERTY_SETTINGS
@given(query=queries(), data=st.data())
def test_deleting_edges_keeps_separation(query, data):
    dag, a, b, z = query
    if len(dag.edges) == 0:
        return
    removed = data.draw(st.lists(st.sampled_from(dag.edges), min_size=1, unique=True))
    if is_d_separated(dag, a, b, z):
        assert is_d_separated(dag.without_edges(removed), a, b, z)


@PROPERTY_SETTINGS
@given(dag=dags())
def test_model_file_round_trip(dag):
    spec = ModelSpec(
        nodes=[{'name': node, 'kind': dag.kind(node).value} for node in dag.nodes],
        name='random',
        edges=[{'from': source, 'to': target} for source, target in dag.edges],
    )
    text = serialize_model(spec)
    assert parse_model(text) == spec
    assert serialize_model(parse_model(text)) == text
    assert flatten(parse_model(text)).dag == dag
