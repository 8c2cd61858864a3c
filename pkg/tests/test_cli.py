import json
import os

import pytest

from cutgraph.cli import EXIT_MODEL, EXIT_OK, EXIT_USAGE, main
from cutgraph.data import load_model
from cutgraph.helper.seeding import SEED_VARIABLE

MAIN_STUDY = 'C=C[1],C[2],C[3],C[4],Y[*],Z[1],Z[2],Z[3],Z[4]'
VALIDATION = ['A=C[5],C[6],W[5],W[6]', 'B=Z[5],Z[6]']


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _run_json(capsys, *argv):
    code, out, err = _run(capsys, '--json', *argv)
    assert code == EXIT_OK, err
    return json.loads(out)


def test_validate(capsys, tmp_path):
    payload = _run_json(capsys, 'validate', 'salmonella')
    assert payload['nodes'] == 39
    assert payload['edges'] == 54
    assert payload['observables'] == 18
    assert sorted(payload['blocks']) == ['A', 'B']
    assert payload['reliability'] == ['A', 'B']

    dot = tmp_path / 'graph.dot'
    code, out, _ = _run(capsys, 'validate', 'misclassification', '--dot', str(dot))
    assert code == EXIT_OK
    assert out.startswith('figure1: 25 nodes (18 observable, 7 parameter)')
    assert dot.read_text(encoding='utf-8').startswith('digraph')

    payload = _run_json(capsys, 'validate', 'longitudinal', '--set', 'T=3')
    assert payload['nodes'] == 9


def test_usage_errors(capsys):
    assert _run(capsys)[0] == EXIT_USAGE
    assert _run(capsys, 'validate')[0] == EXIT_USAGE
    assert _run(capsys, 'validate', 'no_such_model')[0] == EXIT_USAGE
    assert _run(capsys, 'validate', 'salmonella', '--set', 'T')[0] == EXIT_USAGE
    assert _run(capsys, 'experiment', 'other', '--out', 'x')[0] == EXIT_USAGE
    code, out, _ = _run(capsys, '--version')
    assert code == EXIT_OK


def test_model_errors(capsys, tmp_path):
    broken = tmp_path / 'broken.json'
    broken.write_text('{\n  "schema": 1,\n}', encoding='utf-8')
    code, _, err = _run(capsys, 'validate', str(broken))
    assert code == EXIT_MODEL
    assert 'line 3' in err

    code, _, err = _run(capsys, 'cut', 'misclassification', '--blocks', 'A=C[5],C[6],W[5],W[6]', 'B=Z[5],Z[6]')
    assert code == EXIT_MODEL
    assert 'model error' in err

    # the misclassification model has no distributions
    assert _run(capsys, 'sample', 'misclassification')[0] == EXIT_MODEL


def test_modules(capsys):
    payload = _run_json(capsys, 'modules', 'misclassification')
    assert [module['label'] for module in payload['modules']] == ['A', 'B']
    assert payload['modules'][1]['theta'] == ['lambda', 'pi']
    assert payload['relation'] == 'Both'
    assert payload['structure']['ok']

    code, out, _ = _run(capsys, 'modules', 'misclassification')
    assert code == EXIT_OK
    assert out.splitlines()[-1] == 'relation: Both'


def test_order(capsys, tmp_path):
    dot = tmp_path / 'ordering.dot'
    code, out, _ = _run(capsys, 'order', 'misclassification', '--dot', str(dot))
    assert code == EXIT_OK
    assert out.splitlines()[-1] == 'B⇀A'
    assert '"B" -> "A";' in dot.read_text(encoding='utf-8')

    code, out, _ = _run(capsys, 'order', 'misclassification', '--three-blocks', *VALIDATION, MAIN_STUDY)
    assert code == EXIT_OK
    assert out.splitlines() == [
        'A vs (B..C): AtoB', 'case 1(a)', 'admissible: A⇀B⇀C, A⇀C⇀B', 'chosen: undecided'
    ]

    payload = _run_json(capsys, 'order', 'misclassification', '--three-blocks', *VALIDATION, MAIN_STUDY,
                        '--reliability', 'A,B,C')
    assert payload['case'] == '1(a)'
    assert payload['chosen'] == 'A⇀B⇀C'

    payload = _run_json(capsys, 'order', 'misclassification', '--blocks', *VALIDATION, MAIN_STUDY,
                        '--reliability', 'A,B,C')
    assert payload['display'] == 'A⇀B, B⇀C'
    assert _run(capsys, 'order', 'misclassification', '--blocks', *VALIDATION, MAIN_STUDY,
                '--reliability', 'A,B,C', '--tie-break', 'strict')[0] == EXIT_MODEL


def test_cut(capsys, tmp_path):
    out_dir = tmp_path / 'cut'
    payload = _run_json(capsys, 'cut', 'salmonella', '--out', str(out_dir))
    factorization = payload['factorization']
    assert factorization['label'] == 'cut[A⇀B]+within[B]'
    assert [factor['kind'] for factor in factorization['factors']] == [
        'ModulePosterior', 'PriorOnly', 'ConditionalPosterior'
    ]
    assert payload['ordering']['edges'] == [['A', 'B']]
    assert json.loads((out_dir / 'factors.json').read_text(encoding='utf-8')) == payload
    assert os.path.isfile(out_dir / 'ordering.dot')

    code, out, _ = _run(capsys, 'cut', 'misclassification')
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith('cut[B⇀A]: ')
    assert '[ModulePosterior, module B]' in out

    payload = _run_json(capsys, 'cut', 'salmonella', '--standard')
    assert payload['factorization']['label'] == 'standard'
    assert payload['ordering'] is None

    code = _run(capsys, 'cut', 'misclassification', '--blocks', *VALIDATION, MAIN_STUDY, '--standard')[0]
    assert code == EXIT_USAGE


def test_sample_discrete(capsys, tmp_path):
    argv = ['sample', 'two_block_discrete', '--method', 'cut', '--draws', '4000', '--seed', '1']
    payload = _run_json(capsys, *argv, '--out', str(tmp_path))
    assert payload['method'] == 'cut'
    assert payload['draws'] == 4000
    assert payload['seed'] == 1
    assert payload['summary']['phi']['mean'] == pytest.approx(.7, abs=.03)
    assert os.path.isfile(tmp_path / 'samples_cut.csv')
    assert _run_json(capsys, *argv) == payload

    payload = _run_json(capsys, 'sample', 'two_block_discrete', '--method', 'standard', '--draws', '4000')
    assert payload['method'] == 'standard'
    assert payload['summary']['phi']['mean'] == pytest.approx(.21 / .72, abs=.03)


def test_sample_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(SEED_VARIABLE, '17')
    payload = _run_json(capsys, 'sample', 'longitudinal', '--set', 'T=3', '--method', 'standard', '--draws', '200')
    assert payload['seed'] == 17
    assert payload['draws'] == 200
    assert sorted(payload['summary']) == sorted(['a_1', 'theta_1', 'a_2', 'theta_2', 'a_3', 'theta_3'])


def test_experiment(capsys, tmp_path):
    out_dir = tmp_path / 'experiment'
    payload = _run_json(capsys, 'experiment', 'longitudinal-bias', '--out', str(out_dir), '--T', '3', '--n', '10',
                        '--offsets=-2,0,2', '--seed', '5')
    assert len(payload['summary']) == 6
    assert os.path.join(str(out_dir), 'report.csv') in payload['outputs']
    assert os.path.isfile(out_dir / 'bias_boxplot.svg')

    code = _run(capsys, 'experiment', 'longitudinal-bias', '--out', str(out_dir), '--offsets=-1,-2')[0]
    assert code == EXIT_USAGE


def test_model_and_option_aliases(capsys, tmp_path):
    assert _run_json(capsys, 'validate', 'appendix_b.json')['nodes'] == 4
    assert _run_json(capsys, 'validate', 'two_block_discrete')['nodes'] == 4

    partition = ['A=C[5],C[6],W[5],W[6],Z[5],Z[6]', 'B=C[1],C[2],C[3],C[4],Y[*],Z[1],Z[2],Z[3],Z[4]']
    by_partition = _run_json(capsys, 'modules', 'figure1', '--partition', *partition)
    assert by_partition == _run_json(capsys, 'modules', 'misclassification', '--blocks', *partition)
    assert [module['label'] for module in by_partition['modules']] == ['A', 'B']

    argv = ['--out', str(tmp_path), '--T', '3', '--n', '10', '--offsets=-2,0,2', '--seed', '5']
    payload = _run_json(capsys, 'experiment', 'appendix-c', *argv)
    assert len(payload['summary']) == 6
    assert payload == _run_json(capsys, 'experiment', 'longitudinal-bias', *argv)


def test_unusable_table_is_a_model_error(capsys, tmp_path):
    document = load_model('appendix_b').to_dict()
    document['nodes'][0]['distribution']['table'] = ['half', 'half']
    path = tmp_path / 'strings.json'
    path.write_text(json.dumps(document), encoding='utf-8')
    code, _, err = _run(capsys, 'sample', str(path))
    assert code == EXIT_MODEL
    assert 'cannot be executed' in err


def test_repeated_reliability_label(capsys):
    code, _, err = _run(capsys, 'order', 'figure1', '--reliability', 'A,A')
    assert code == EXIT_USAGE
    assert '--reliability' in err


def test_outputs_are_reproducible(capsys, tmp_path):
    for run in ('first', 'second'):
        _run_json(capsys, 'sample', 'appendix_b', '--method', 'cut', '--draws', '2000', '--seed', '3',
                  '--out', str(tmp_path / run))
        _run_json(capsys, 'sample', 'longitudinal', '--set', 'T=3', '--method', 'cut', '--draws', '300',
                  '--seed', '3', '--out', str(tmp_path / run / 'longitudinal'))
        _run_json(capsys, 'experiment', 'appendix-c', '--out', str(tmp_path / run / 'experiment'), '--T', '3',
                  '--n', '10', '--seed', '4', '--replicates', '2')

    for name in ('samples_cut.csv', 'longitudinal/samples_cut.csv', 'experiment/report.csv',
                 'experiment/factors.json', 'experiment/summary.csv'):
        first = (tmp_path / 'first' / name).read_bytes()
        assert len(first) > 0
        assert first == (tmp_path / 'second' / name).read_bytes(), name
