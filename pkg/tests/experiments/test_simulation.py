import json
import os

import numpy as np
import pandas as pd
import pytest

from cutgraph.experiments import (
    ExperimentConfig, bias_coefficient_draws, chain_structure, run_appendix_c, run_bias_experiment, scenario_name
)
from cutgraph.modules import FactorKind
from cutgraph.stats import LinGaussModel


@pytest.fixture(scope='module')
def report():
    return run_bias_experiment(ExperimentConfig(T=4, n=20, replicates=2, seed=3))


def test_scenario_name():
    assert scenario_name(-2.) == 'upper biased'
    assert scenario_name(0.) == 'unbiased'
    assert scenario_name(.5) == 'lower biased'


def test_config_validation():
    config = ExperimentConfig(T=3, n=10, offsets=[-1, 1])
    assert config.offsets == (-1., 1.)
    assert config.sampler.n_outer == config.n_draws
    assert config.to_dict()['offsets'] == [-1., 1.]
    with pytest.raises(ValueError):
        ExperimentConfig(T=1)
    with pytest.raises(ValueError):
        ExperimentConfig(offsets=(-1., -2.))
    with pytest.raises(ValueError):
        ExperimentConfig(offsets=())
    with pytest.raises(ValueError):
        ExperimentConfig(replicates=0)
    with pytest.raises(ValueError):
        ExperimentConfig(standard_method='laplace')


def test_report_table(report):
    table = report.table
    assert len(table) == 3 * 2 * 2 * 4
    assert report.scenarios == ['upper biased', 'unbiased', 'lower biased']
    assert list(table['method'].unique()) == ['cut', 'standard']
    np.testing.assert_allclose(table['estimate'] - table['truth'], table['bias'])
    np.testing.assert_allclose(table['normalized_bias'] * table['std'], table['bias'])
    assert len(report.data_sets) == 2

    # every scenario analyses the same data sets
    truths = [report.rows(s, 'cut')['truth'].to_numpy() for s in report.scenarios]
    np.testing.assert_array_equal(truths[0], truths[1])
    np.testing.assert_array_equal(truths[0], truths[2])

    # the first timepoint has no earlier timepoint for the link to act through
    first = table[(table['method'] == 'cut') & (table['t'] == 1)]
    for replicate in (0, 1):
        estimates = first.loc[first['replicate'] == replicate, 'estimate']
        assert estimates.max() - estimates.min() < 1e-10


def test_summary(report):
    summary = report.summary()
    assert len(summary) == 6
    assert list(summary['method']) == ['cut', 'standard'] * 3
    unbiased = summary[summary['scenario'] == 'unbiased']
    assert unbiased['sign_agreement'].isna().all()
    biased = summary[summary['scenario'] != 'unbiased']
    assert ((biased['sign_agreement'] >= 0) & (biased['sign_agreement'] <= 1)).all()
    assert ((summary['overestimate_fraction'] >= 0) & (summary['overestimate_fraction'] <= 1)).all()


def test_determinism():
    config = ExperimentConfig(T=3, n=10, replicates=3, seed=8)
    first = run_bias_experiment(config).table
    threaded = run_bias_experiment(ExperimentConfig(T=3, n=10, replicates=3, seed=8, n_jobs=3)).table
    pd.testing.assert_frame_equal(first, threaded)
    other = run_bias_experiment(ExperimentConfig(T=3, n=10, replicates=3, seed=9)).table
    assert not np.allclose(first['estimate'], other['estimate'])


def test_standard_mh_matches_conjugate():
    conjugate = run_bias_experiment(ExperimentConfig(T=2, n=30, offsets=(2.,), seed=1)).table
    mh = run_bias_experiment(ExperimentConfig(T=2, n=30, offsets=(2.,), seed=1, standard_method='mh', n_draws=500))
    exact = conjugate[conjugate['method'] == 'standard']
    sampled = mh.table[mh.table['method'] == 'standard']
    difference = np.abs(sampled['estimate'].to_numpy() - exact['estimate'].to_numpy())
    assert np.all(difference < exact['std'].to_numpy())
    pd.testing.assert_frame_equal(
        conjugate[conjugate['method'] == 'cut'], mh.table[mh.table['method'] == 'cut']
    )


def test_write(report, tmp_path):
    paths = report.write(str(tmp_path / 'out'))
    names = sorted(os.path.basename(path) for path in paths)
    assert names == [
        'bias_boxplot.svg', 'bias_scatter.svg', 'config.json', 'factors.json', 'ordering.dot', 'report.csv',
        'summary.csv'
    ]
    assert all(os.path.isfile(path) for path in paths)
    written = pd.read_csv(tmp_path / 'out' / 'report.csv')
    assert list(written.columns) == list(report.table.columns)
    assert len(written) == len(report.table)
    with open(tmp_path / 'out' / 'config.json', encoding='utf-8') as f:
        assert json.load(f)['T'] == 4
    with open(tmp_path / 'out' / 'ordering.dot', encoding='utf-8') as f:
        assert '"M_1" -> "M_2";' in f.read()


def test_chain_structure():
    model = LinGaussModel.simulate(4, 10, np.random.default_rng(0))
    modules, ordering, cf = chain_structure(model)
    assert [module.label for module in modules] == ['M_1', 'M_2', 'M_3', 'M_4']
    assert ordering.describe() == 'M_1⇀M_2, M_2⇀M_3, M_3⇀M_4'
    assert cf.factors[0].kind is FactorKind.MODULE_POSTERIOR
    assert cf.targets == set(model.parameter_names)


def test_bias_coefficient_draws():
    draws = bias_coefficient_draws(n=50, draws=40, seed=2)
    assert list(draws.columns) == ['K1', 'K2', 'K1_matrix', 'K2_matrix']
    assert len(draws) == 40
    np.testing.assert_allclose(draws['K1'], draws['K1_matrix'])
    np.testing.assert_allclose(draws['K2'], draws['K2_matrix'])
    # independent covariates give coefficients centred on zero
    assert abs(draws['K2'].mean()) < .1


def test_bias_coefficients_centred_over_redraws():
    draws = bias_coefficient_draws(n=100, draws=200, seed=0)
    np.testing.assert_allclose(draws['K1'], draws['K1_matrix'], rtol=0, atol=1e-12)
    np.testing.assert_allclose(draws['K2'], draws['K2_matrix'], rtol=0, atol=1e-12)
    standard_error = draws['K2'].std(ddof=1) / np.sqrt(len(draws))
    assert abs(draws['K2'].mean()) < 4 * standard_error


def test_full_size_scenarios():
    assert run_appendix_c is run_bias_experiment
    report = run_appendix_c(ExperimentConfig(T=100, n=100, seed=1))
    summary = report.summary().set_index(['scenario', 'method'])
    assert len(report.rows('unbiased', 'cut')) == 100

    assert summary.loc[('upper biased', 'standard'), 'overestimate_fraction'] >= .85
    assert abs(summary.loc[('upper biased', 'cut'), 'mean_normalized_bias']) <= .5
    assert summary.loc[('lower biased', 'standard'), 'overestimate_fraction'] <= .15
    assert abs(summary.loc[('lower biased', 'cut'), 'mean_normalized_bias']) <= .5

    for method in ('cut', 'standard'):
        assert abs(summary.loc[('unbiased', method), 'mean_normalized_bias']) <= .5
    assert summary.loc[('unbiased', 'standard'), 'std_bias'] <= summary.loc[('unbiased', 'cut'), 'std_bias']
