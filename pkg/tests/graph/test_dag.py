import networkx as nx
import numpy as np
import pytest

from cutgraph.errors import (
    CycleDetected, DuplicateEdge, DuplicateNode, ModelError, SelfLoop, UnknownEndpoint, UnknownNode
)
from cutgraph.graph import Dag, NodeKind, build_dag, full_factorization, random_dag, sorted_nodes


@pytest.fixture
def misclassification_small():
    # main study i = 1..2, validation i = 3
    nodes = [('beta', 'parameter'), ('pi', 'parameter'), ('lambda', 'parameter')]
    edges = []
    for i in (1, 2):
        nodes += [(f'C_{i}', 'observable'), (f'W_{i}', 'parameter'), (f'Y_{i}', 'observable'),
                  (f'Z_{i}', 'observable')]
        edges += [(f'C_{i}', f'Y_{i}'), (f'C_{i}', f'W_{i}'), (f'W_{i}', f'Y_{i}'), (f'W_{i}', f'Z_{i}'),
                  ('beta', f'Y_{i}'), ('pi', f'W_{i}'), ('lambda', f'Z_{i}')]
    nodes += [('C_3', 'observable'), ('W_3', 'observable'), ('Z_3', 'observable')]
    edges += [('C_3', 'W_3'), ('W_3', 'Z_3'), ('pi', 'W_3'), ('lambda', 'Z_3')]
    return build_dag(nodes, edges)


def test_single_node():
    dag = build_dag([('x', 'observable')], [])
    assert dag.nodes == ('x',)
    assert dag.edges == ()
    assert dag.is_observable('x')


def test_validation_errors():
    with pytest.raises(CycleDetected):
        build_dag([('a', 'parameter'), ('b', 'parameter')], [('a', 'b'), ('b', 'a')])
    with pytest.raises(UnknownEndpoint):
        build_dag([('a', 'parameter')], [('a', 'b')])
    with pytest.raises(DuplicateNode):
        build_dag([('a', 'parameter'), ('a', 'observable')], [])
    with pytest.raises(SelfLoop):
        build_dag([('a', 'parameter')], [('a', 'a')])
    with pytest.raises(ModelError):
        build_dag([('a', 'latent')], [])
    with pytest.raises(ModelError):
        build_dag([('', 'parameter')], [])


def test_duplicate_edge_rejected():
    with pytest.raises(DuplicateEdge):
        build_dag({'a': 'parameter', 'b': 'observable'}, [('a', 'b'), ('a', 'b')])


def test_misclassification_graph(misclassification_small):
    dag = misclassification_small
    assert len(dag) == 3 + 4 * 2 + 3
    assert dag.kind('W_1') is NodeKind.PARAMETER
    assert dag.kind('W_3') is NodeKind.OBSERVABLE
    ys = {'Y_1', 'Y_2'}
    assert dag.ancestors(ys) & dag.observables == {'C_1', 'C_2'}
    assert dag.observable_ancestors(ys) == {'C_1', 'C_2'}


def test_queries_exclude_query_set():
    dag = build_dag([('a', 'parameter'), ('b', 'parameter'), ('c', 'observable')], [('a', 'b'), ('b', 'c')])
    assert dag.ancestors({'c'}) == {'a', 'b'}
    assert dag.ancestors({'a', 'b'}) == frozenset()
    assert dag.parents({'b', 'c'}) == {'a'}
    assert dag.children({'a', 'b'}) == {'c'}
    assert dag.descendants('a') == {'b', 'c'}
    with pytest.raises(UnknownNode):
        dag.parents('z')


def test_full_factorization():
    dag = build_dag([('a', 'parameter'), ('b', 'observable')], [('a', 'b')])
    assert [str(f) for f in full_factorization(dag)] == ['p(a)', 'p(b | a)']

    collider = build_dag([('a', 'parameter'), ('b', 'parameter'), ('c', 'observable')], [('a', 'c'), ('b', 'c')])
    assert [str(f) for f in full_factorization(collider)] == ['p(a)', 'p(b)', 'p(c | a, b)']

    two_block = build_dag(
        [('phi', 'parameter'), ('theta', 'parameter'), ('Y', 'observable'), ('Z', 'observable')],
        [('phi', 'Z'), ('phi', 'Y'), ('theta', 'Y')]
    )
    factors = {str(f) for f in full_factorization(two_block)}
    assert factors == {'p(Y | phi, theta)', 'p(Z | phi)', 'p(theta)', 'p(phi)'}


def test_natural_order():
    assert sorted_nodes(['W_10', 'W_2', 'W_1']) == ['W_1', 'W_2', 'W_10']


def _path_ancestors(dag, node):
    graph = dag.to_networkx()
    return {other for other in dag.nodes if other != node and nx.has_path(graph, other, node)}


@pytest.mark.parametrize('seed', range(25))
def test_random_dag_properties(seed):
    rng = np.random.default_rng(seed)
    dag = random_dag(rng, max_nodes=12)
    assert 4 <= len(dag) <= 12
    assert len(dag.observables) >= 1
    assert sum(len(f.head) for f in full_factorization(dag)) == len(dag)
    for factor in full_factorization(dag):
        (node,) = factor.head
        assert factor.conditioners == dag.parents(node)
        assert node not in dag.parents({node})
    for node in dag.nodes:
        assert dag.ancestors({node}) == _path_ancestors(dag, node)
        closure = set(dag.parents(node))
        for parent in dag.parents(node):
            closure |= dag.ancestors({parent})
        assert dag.ancestors({node}) == closure


def test_random_dag_is_deterministic():
    first = random_dag(np.random.default_rng(7))
    second = random_dag(np.random.default_rng(7))
    assert first == second
    assert first.topological_order() == second.topological_order()


def test_without_edges_and_dot():
    dag = build_dag([('a', 'parameter'), ('b', 'observable')], [('a', 'b')])
    assert dag.without_edges([('a', 'b')]).edges == ()
    dot = dag.to_dot()
    assert '"a" [shape=ellipse];' in dot
    assert '"b" [shape=box];' in dot
    assert '"a" -> "b";' in dot


def test_subgraph():
    dag = build_dag([('a', 'parameter'), ('b', 'parameter'), ('c', 'observable')], [('a', 'b'), ('b', 'c'), ('a', 'c')])
    smaller = dag.subgraph(['a', 'c'])
    assert smaller.nodes == ('a', 'c')
    assert smaller.edges == (('a', 'c'),)
    assert smaller.is_observable('c')
    with pytest.raises(UnknownNode):
        dag.subgraph(['a', 'q'])


def test_topological_order_respects_edges():
    dag = random_dag(np.random.default_rng(3), n_nodes=15)
    order = {node: i for i, node in enumerate(dag.topological_order())}
    for source, target in dag.edges:
        assert order[source] < order[target]
    assert isinstance(dag, Dag)
    assert list(dag.nodes) == sorted_nodes(dag.nodes)
