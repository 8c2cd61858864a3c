import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import pytest

from cutgraph.plotting import bias_boxplot, bias_scatter


plt.ioff()


@pytest.fixture
def report():
    rng = np.random.default_rng(0)
    frames = []
    for scenario, shift in [('upper biased', 1.), ('unbiased', 0.), ('lower biased', -1.)]:
        for method in ('cut', 'standard'):
            truth = 10 * np.sin(np.arange(1, 21))
            estimate = truth + shift * (method == 'standard') + rng.normal(scale=.3, size=20)
            frames.append(pd.DataFrame({
                'scenario': scenario, 'method': method, 't': np.arange(1, 21), 'truth': truth,
                'estimate': estimate, 'normalized_bias': (estimate - truth) / .3,
            }))
    return pd.concat(frames, ignore_index=True)


def test_bias_boxplot(report):
    fig, ax = bias_boxplot(report)
    assert isinstance(fig, plt.Figure)
    assert [label.get_text() for label in ax.get_xticklabels()] == ['upper biased', 'unbiased', 'lower biased']
    assert ax.get_title() == 'Normalized estimation bias'
    assert [text.get_text() for text in ax.get_legend().get_texts()] == ['cut', 'standard']
    plt.close(fig)

    fig, ax = plt.subplots()
    returned_fig, returned_ax = bias_boxplot(report, fig=fig, ax=ax, title='Bias', methods=['cut'])
    assert returned_fig is fig
    assert returned_ax is ax
    assert ax.get_title() == 'Bias'
    plt.close(fig)


def test_bias_scatter(report):
    fig, axes = bias_scatter(report)
    assert len(axes) == 3
    assert [ax.get_title() for ax in axes] == ['upper biased', 'unbiased', 'lower biased']
    # one collection per method in every panel
    assert all(len(ax.collections) == 2 for ax in axes)
    plt.close(fig)

    fig, axes = plt.subplots(ncols=2)
    with pytest.raises(ValueError):
        bias_scatter(report, fig=fig, ax=axes)
    plt.close(fig)


def test_bias_plot_errors(report):
    with pytest.raises(ValueError):
        bias_boxplot(report.drop(columns='normalized_bias'))
    with pytest.raises(ValueError):
        bias_scatter(report.iloc[:0])
    fig, ax = plt.subplots()
    with pytest.raises(ValueError):
        bias_boxplot(report, ax=ax)
    with pytest.raises(AssertionError):
        bias_boxplot(report, colour='red')
    plt.close(fig)
