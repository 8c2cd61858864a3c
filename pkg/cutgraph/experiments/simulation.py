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
Bias-reduction simulation on the longitudinal model.

Data are drawn from the true process (link f*) and analysed with the misspecified link f* + delta. A negative delta
makes standard inference overestimate theta_t ("upper biased"), a positive one makes it underestimate ("lower
biased"). Cut inference treats each timepoint as its own module, M_1 feeding M_2 and so on, so the misspecified
link cannot feed back into earlier timepoints.
"""

import concurrent.futures
import json
import logging
import os
from dataclasses import dataclass, field

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import scipy.linalg

from cutgraph.errors import NonFiniteDensity
from cutgraph.helper.progress_bar import ProgressBar
from cutgraph.helper.seeding import spawn_rng
from cutgraph.plotting.bias import bias_boxplot, bias_scatter
from cutgraph.stats.gaussian import (
    LinGaussModel, bias_coefficients, chain_structure, cut_longitudinal_posterior, longitudinal_log_density,
    step_precision, standard_longitudinal_posterior
)
from cutgraph.stats.sampling import SamplerConfig, mh_sample

logger = logging.getLogger(__name__)

METHODS = ('cut', 'standard')
REPORT_COLUMNS = [
    'scenario', 'offset', 'method', 'replicate', 't', 'truth', 'estimate', 'std', 'bias', 'normalized_bias'
]


def scenario_name(offset):
    if offset < 0:
        return 'upper biased'
    if offset > 0:
        return 'lower biased'
    return 'unbiased'


@dataclass(frozen=True)
class ExperimentConfig:
    """
    T, n : timepoints and observations per timepoint
    offsets : link offsets delta, one scenario each (at most one per sign)
    replicates : independent data sets; every scenario analyses the same data sets
    seed : root seed
    n_draws : Metropolis-Hastings iterations per walker when standard_method='mh'
    n_jobs : worker threads
    standard_method : 'conjugate' (closed form) or 'mh'. The analysis link theta + delta is affine, so the standard
        posterior of (a, theta) given X is Gaussian and 'conjugate' returns the exact distribution that 'mh' samples
        with random-walk Metropolis-Hastings on the same joint density; the two differ by Monte Carlo error only
    echo_progress : print a progress bar to stderr
    """

    T: int = 100
    n: int = 100
    offsets: tuple = (-2., 0., 2.)
    replicates: int = 1
    seed: int = 0
    n_draws: int = 1000
    n_jobs: int = 1
    standard_method: str = 'conjugate'
    echo_progress: bool = False
    sampler: SamplerConfig = field(default=None, repr=False)

    def __post_init__(self):
        if self.T < 2 or self.n < 2:
            raise ValueError(f'<T> and <n> must be at least 2, got T={self.T}, n={self.n}')
        object.__setattr__(self, 'offsets', tuple(float(offset) for offset in self.offsets))
        names = [scenario_name(offset) for offset in self.offsets]
        if len(names) == 0 or len(set(names)) != len(names):
            raise ValueError(f'<offsets> must hold at most one negative, zero and positive value, got {self.offsets}')
        if self.replicates < 1 or self.n_jobs < 1 or self.n_draws < 1:
            raise ValueError('<replicates>, <n_jobs> and <n_draws> must be positive')
        if self.standard_method not in ('conjugate', 'mh'):
            raise ValueError(f'<standard_method> must be \'conjugate\' or \'mh\', {self.standard_method!r} was passed')
        if self.sampler is None:
            # random-walk scale for whitened coordinates in 2T dimensions
            sampler = SamplerConfig(
                n_outer=self.n_draws, burn_in=.2, proposal_scale=2.38 / np.sqrt(2 * self.T), n_walkers=4
            )
            object.__setattr__(self, 'sampler', sampler)

    def to_dict(self):
        return {
            'T': self.T, 'n': self.n, 'offsets': list(self.offsets), 'replicates': self.replicates,
            'seed': self.seed, 'n_draws': self.n_draws, 'standard_method': self.standard_method,
        }


class BiasReport:

    def __init__(self, table, config, data_sets=()):
        """
        Per-timepoint estimates of theta_t from cut and standard inference under every scenario.

        Parameters
        ----------
        table : pd.DataFrame
            One row per (scenario, method, replicate, t) with the columns of REPORT_COLUMNS.
        config : ExperimentConfig
        data_sets : sequence of LinGaussModel, optional
            Simulated data, one per replicate.
        """

        self.table = table
        self.config = config
        self.data_sets = tuple(data_sets)

    def __repr__(self):
        return f'BiasReport({len(self.table)} rows, scenarios: {", ".join(self.scenarios)})'

    @property
    def scenarios(self):
        return list(dict.fromkeys(self.table['scenario']))

    def rows(self, scenario, method):
        table = self.table
        return table[(table['scenario'] == scenario) & (table['method'] == method)]

    def summary(self):
        """
        Per scenario and method: mean and standard deviation of the bias and the normalized bias, the fraction of
        overestimates, and the fraction of biases with the sign the offset pushes towards (-delta).
        """

        records = []
        for scenario in self.scenarios:
            for method in METHODS:
                rows = self.rows(scenario, method)
                offset = float(rows['offset'].iloc[0])
                expected = -np.sign(offset)
                records.append({
                    'scenario': scenario,
                    'offset': offset,
                    'method': method,
                    'mean_bias': rows['bias'].mean(),
                    'std_bias': rows['bias'].std(ddof=1),
                    'mean_normalized_bias': rows['normalized_bias'].mean(),
                    'std_normalized_bias': rows['normalized_bias'].std(ddof=1),
                    'overestimate_fraction': float(np.mean(rows['estimate'] > rows['truth'])),
                    'sign_agreement': float(np.mean(np.sign(rows['bias']) == expected)) if expected != 0 else np.nan,
                })
        return pd.DataFrame.from_records(records)

    def figures(self):
        """Box plot of the normalized bias and scatter of the estimates against the truth."""

        return {
            'bias_boxplot': bias_boxplot(self.table)[0],
            'bias_scatter': bias_scatter(self.table)[0],
        }

    def write(self, directory):
        """
        Write report.csv, summary.csv, config.json, the SVG figures and, when data sets are attached, the
        ordering.dot and factors.json of the module chain into `directory`.

        Returns
        -------
        list of str
            Written paths.
        """

        os.makedirs(directory, exist_ok=True)
        paths = []
        path = os.path.join(directory, 'report.csv')
        self.table.to_csv(path, index=False, float_format='%.10g')
        paths.append(path)
        path = os.path.join(directory, 'summary.csv')
        self.summary().to_csv(path, index=False, float_format='%.10g')
        paths.append(path)
        path = os.path.join(directory, 'config.json')
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.config.to_dict(), f, sort_keys=True, indent=2)
            f.write('\n')
        paths.append(path)
        for name, fig in self.figures().items():
            path = os.path.join(directory, f'{name}.svg')
            fig.savefig(path, format='svg', metadata={'Date': None})
            plt.close(fig)
            paths.append(path)
        if len(self.data_sets) > 0:
            paths += write_chain_artifacts(self.data_sets[0], directory)
        return paths


def _standard_mh(model, config, seed):
    linearised = standard_longitudinal_posterior(model)
    cholesky = scipy.linalg.cholesky(linearised.cov, lower=True)

    # whitened coordinates around the linearised posterior
    def logdensity(z):
        return longitudinal_log_density(model, linearised.mean + cholesky @ z)

    sample = mh_sample(logdensity, np.zeros(2 * model.T), config.sampler, seed=seed)
    draws = linearised.mean + sample.draws.to_numpy() @ cholesky.T
    return draws[:, 1::2].mean(axis=0), draws[:, 1::2].std(axis=0, ddof=1)


def _estimates(model, config, seed):
    cut = cut_longitudinal_posterior(model)
    estimates = {'cut': (np.array([m.mean[1] for m in cut]), np.array([m.std[1] for m in cut]))}
    if config.standard_method == 'conjugate':
        standard = standard_longitudinal_posterior(model)
        estimates['standard'] = (standard.mean[1::2], standard.std[1::2])
    else:
        estimates['standard'] = _standard_mh(model, config, seed)
    return estimates


def _run_task(config, data, index, offset, replicate):
    model = data.with_offset(offset)
    seed = int(spawn_rng(config.seed, 1, index, replicate).integers(2 ** 31))
    frames = []
    for method, (estimate, std) in _estimates(model, config, seed).items():
        bias = estimate - model.theta
        frames.append(pd.DataFrame({
            'scenario': scenario_name(offset),
            'offset': offset,
            'method': method,
            'replicate': replicate,
            't': np.arange(1, model.T + 1),
            'truth': model.theta,
            'estimate': estimate,
            'std': std,
            'bias': bias,
            'normalized_bias': bias / std,
        }))
    logger.debug('scenario %s, replicate %d done', scenario_name(offset), replicate)
    return frames


def run_bias_experiment(config=None):
    """
    Run the bias-reduction simulation.

    Parameters
    ----------
    config : ExperimentConfig, optional

    Returns
    -------
    BiasReport
        Rows sorted by scenario (in the order of config.offsets), method, replicate and t, independent of how the
        workers were scheduled.
    """

    config = config or ExperimentConfig()
    data_sets = [
        LinGaussModel.simulate(config.T, config.n, spawn_rng(config.seed, 0, replicate))
        for replicate in range(config.replicates)
    ]
    tasks = [
        (index, offset, replicate)
        for index, offset in enumerate(config.offsets)
        for replicate in range(config.replicates)
    ]
    logger.info('running %d scenario(s) x %d replicate(s) with %d worker(s)',
                len(config.offsets), config.replicates, config.n_jobs)

    progress_bar = ProgressBar(total_iterations=len(tasks), prefix='simulation')
    if config.echo_progress:
        progress_bar.print()
    frames = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.n_jobs) as executor:
        futures = [
            executor.submit(_run_task, config, data_sets[replicate], index, offset, replicate)
            for index, offset, replicate in tasks
        ]
        for future in concurrent.futures.as_completed(futures):
            frames += future.result()
            progress_bar.increment(echo=config.echo_progress)
    if config.echo_progress:
        progress_bar.close()

    table = pd.concat(frames, ignore_index=True)
    order = {scenario_name(offset): i for i, offset in enumerate(config.offsets)}
    table['_order'] = table['scenario'].map(order)
    table['_method'] = table['method'].map({method: i for i, method in enumerate(METHODS)})
    table = table.sort_values(['_order', '_method', 'replicate', 't'], kind='mergesort')
    table = table.drop(columns=['_order', '_method']).reset_index(drop=True)[REPORT_COLUMNS]
    if not np.all(np.isfinite(table[['estimate', 'std', 'bias', 'normalized_bias']].to_numpy(dtype=float))):
        raise NonFiniteDensity('simulation produced non-finite estimates')
    return BiasReport(table, config, data_sets)


# name of the experiment on the command line ('appendix-c')
run_appendix_c = run_bias_experiment


def bias_coefficient_draws(n=100, draws=200, seed=0):
    """
    Bias coefficients K_t = Lambda_t^-1 P_t^T Q_t over independent covariate draws, in closed form and by the
    matrix route.

    Returns
    -------
    pd.DataFrame
        Columns K1, K2 (closed form) and K1_matrix, K2_matrix.
    """

    rng = spawn_rng(seed, 1)
    records = []
    for _ in range(draws):
        p, q = rng.standard_normal(n), rng.standard_normal(n)
        P = np.column_stack([np.ones(n), p])
        k1, k2 = bias_coefficients(P, q)
        matrix = scipy.linalg.solve(step_precision(P), P.T @ q, assume_a='pos')
        records.append({'K1': k1, 'K2': k2, 'K1_matrix': matrix[0], 'K2_matrix': matrix[1]})
    return pd.DataFrame.from_records(records)


def write_chain_artifacts(model, directory):
    """ordering.dot and factors.json for the per-time module chain of `model`."""

    _, ordering, cf = chain_structure(model)
    os.makedirs(directory, exist_ok=True)
    paths = [os.path.join(directory, 'ordering.dot'), os.path.join(directory, 'factors.json')]
    with open(paths[0], 'w', encoding='utf-8') as f:
        f.write(ordering.to_dot())
    with open(paths[1], 'w', encoding='utf-8') as f:
        json.dump(cf.to_dict(), f, sort_keys=True, indent=2)
        f.write('\n')
    return paths
