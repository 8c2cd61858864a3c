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

import matplotlib.pyplot as plt
import numpy as np

from .styles import cutgraph_rc, method_colors, theme_color

REQUIRED = ('scenario', 'method', 't', 'truth', 'estimate', 'normalized_bias')


def _check_report(report):
    missing = [column for column in REQUIRED if column not in report.columns]
    if len(missing) > 0:
        raise ValueError(f'report is missing the columns {missing}')
    if len(report) == 0:
        raise ValueError('report is empty')


def _figure(fig, ax, ncols, figsize):
    if fig is None and ax is None:
        fig, ax = plt.subplots(ncols=ncols, figsize=figsize, squeeze=False)
        return fig, ax[0], True
    if fig is not None and ax is not None:
        return fig, np.atleast_1d(ax), False
    raise ValueError('both fig and ax must be passed')


def bias_boxplot(report, fig=None, ax=None, **kwargs):
    """
    Box plot of the normalized bias per scenario, cut and standard side by side.

    Parameters
    ----------
    report : pd.DataFrame
        Bias report with columns scenario, method, t, truth, estimate and normalized_bias.
    fig : matplotlib figure object, optional
        Must be passed together with ax (default=None).
    ax : matplotlib axes object, optional
        If None, creates a new figure (default=None).
    title : str, optional
        Figure title (default='Normalized estimation bias').
    methods : sequence, optional
        Methods to draw, in order (default=('cut', 'standard')).
    box_props : dict, optional
        Keyword arguments passed to ax.boxplot.

    Returns
    -------
    fig : matplotlib Figure object
    ax : matplotlib Axes object
    """

    title = kwargs.pop('title', 'Normalized estimation bias')
    methods = tuple(kwargs.pop('methods', ('cut', 'standard')))
    box_props = kwargs.pop('box_props', dict(widths=.35, showfliers=True, patch_artist=True))
    assert len(kwargs) == 0, f'unrecognized arguments passed in: {", ".join(kwargs.keys())}'
    _check_report(report)

    scenarios = list(dict.fromkeys(report['scenario']))
    with plt.style.context('bmh'):
        with plt.rc_context(rc=cutgraph_rc):
            fig, axes, created = _figure(fig, ax, 1, (8, 4))
            ax = axes[0]
            width = .8 / len(methods)
            for j, method in enumerate(methods):
                subset = report[report['method'] == method]
                data = [subset.loc[subset['scenario'] == s, 'normalized_bias'].to_numpy() for s in scenarios]
                positions = np.arange(len(scenarios)) + (j - (len(methods) - 1) / 2) * width
                boxes = ax.boxplot(data, positions=positions, **box_props)
                color = method_colors.get(method, theme_color)
                for patch in boxes.get('boxes', []):
                    if hasattr(patch, 'set_facecolor'):
                        patch.set_facecolor(color)
                        patch.set_alpha(.6)
                ax.plot([], [], color=color, lw=6, alpha=.6, label=method)
            ax.axhline(0, color=theme_color, lw=.8, ls='--', zorder=-10)
            ax.set_xticks(np.arange(len(scenarios)))
            ax.set_xticklabels(scenarios)
            ax.set_ylabel('Bias / posterior standard deviation')
            ax.legend(loc='upper right')
            ax.set_title(title)
            if created:
                fig.tight_layout()
    return fig, ax


def bias_scatter(report, fig=None, ax=None, **kwargs):
    """
    Posterior means against the true values, one panel per scenario.

    Parameters
    ----------
    report : pd.DataFrame
        Bias report with columns scenario, method, t, truth, estimate and normalized_bias.
    fig : matplotlib figure object, optional
        Must be passed together with ax (default=None).
    ax : sequence of matplotlib axes objects, optional
        One axes per scenario. If None, creates a new figure (default=None).
    methods : sequence, optional
        Methods to draw, in order (default=('cut', 'standard')).
    scatter_props : dict, optional
        Keyword arguments passed to ax.scatter.

    Returns
    -------
    fig : matplotlib Figure object
    ax : np.ndarray of matplotlib Axes objects
    """

    methods = tuple(kwargs.pop('methods', ('cut', 'standard')))
    scatter_props = kwargs.pop('scatter_props', dict(s=8, alpha=.7, linewidths=0))
    assert len(kwargs) == 0, f'unrecognized arguments passed in: {", ".join(kwargs.keys())}'
    _check_report(report)

    scenarios = list(dict.fromkeys(report['scenario']))
    with plt.style.context('bmh'):
        with plt.rc_context(rc=cutgraph_rc):
            fig, axes, created = _figure(fig, ax, len(scenarios), (4 * len(scenarios), 4))
            if len(axes) != len(scenarios):
                raise ValueError(f'{len(scenarios)} axes are needed, {len(axes)} were passed')
            limits = [report['truth'].min(), report['truth'].max()]
            for panel, scenario in zip(axes, scenarios):
                subset = report[report['scenario'] == scenario]
                for method in methods:
                    rows = subset[subset['method'] == method]
                    panel.scatter(
                        rows['truth'], rows['estimate'], color=method_colors.get(method, theme_color), label=method,
                        **scatter_props
                    )
                panel.plot(limits, limits, color=theme_color, lw=.8, ls='--', zorder=-10)
                panel.set_xlabel('True value')
                panel.set_title(scenario)
            axes[0].set_ylabel('Posterior mean')
            axes[0].legend(loc='upper left')
            if created:
                fig.tight_layout()
    return fig, axes
