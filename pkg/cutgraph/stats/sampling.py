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
Samplers: a random-walk Metropolis-Hastings engine and the nested (two-stage) sampler for cut distributions.

The nested sampler draws the factors of a cut factorization in order. Each outer draw of the upstream parameters
gets its own conditional draw of the downstream ones, so information never flows back upstream. Discrete and
linear-Gaussian factors are drawn exactly; other continuous factors run one short Metropolis-Hastings chain per
outer draw and keep its final state.
"""

import logging
from dataclasses import dataclass, field

import emcee
import numpy as np
import pandas as pd
import statsmodels.tsa.stattools

from cutgraph.errors import ModelError, NonFiniteDensity
from cutgraph.graph.dag import sorted_nodes
from cutgraph.helper.seeding import legacy_state, spawn_rng
from cutgraph.modules.factorization import CutFactor, CutFactorization, FactorKind
from cutgraph.stats.continuous import ContinuousModel
from cutgraph.stats.discrete import DiscreteModel, enumerate_posterior
from cutgraph.stats.gaussian import (
    LinGaussModel, chain_structure, sample_cut_chain, standard_longitudinal_posterior
)

logger = logging.getLogger(__name__)

LOW_ACCEPTANCE = .05


@dataclass(frozen=True)
class SamplerConfig:
    """
    n_outer : outer draws (and retained draws) of the nested sampler
    n_inner : iterations of every inner chain
    burn_in : fraction of a Metropolis-Hastings chain discarded
    proposal_scale : standard deviation of the random-walk proposal
    n_walkers : independent chains run by `mh_sample`
    """

    n_outer: int = 2000
    n_inner: int = 200
    burn_in: float = .2
    proposal_scale: float = .5
    n_walkers: int = 4

    def __post_init__(self):
        if self.n_outer < 1 or self.n_inner < 1 or self.n_walkers < 1:
            raise ValueError('<n_outer>, <n_inner> and <n_walkers> must be positive')
        if not 0 <= self.burn_in < 1:
            raise ValueError(f'<burn_in> must be in [0, 1), {self.burn_in} was passed')
        if self.proposal_scale <= 0:
            raise ValueError(f'<proposal_scale> must be positive, {self.proposal_scale} was passed')


def integrated_time(x):
    """
    Integrated autocorrelation time of a chain from its autocorrelation function, summing consecutive pairs of
    autocorrelations while they stay positive.
    """

    x = np.asarray(x, dtype=float)
    if len(x) < 4 or np.allclose(x, x[0]):
        return 1.
    rho = statsmodels.tsa.stattools.acf(x, nlags=len(x) - 1, fft=True)
    tau = -1.
    for k in range(0, len(rho) - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        tau += 2 * pair
    return max(tau, 1.)


@dataclass
class SampleSet:
    """
    Retained draws (rows) of named parameters (columns) with their provenance.

    chains : chain index of every row; rows of one chain are consecutive iterations. Rows of an independent
        sample each have their own chain.
    """

    draws: pd.DataFrame
    seed: int
    method: str
    burn_in: int = 0
    thin: int = 1
    acceptance: float = None
    chains: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.draws.to_numpy(dtype=float))):
            raise NonFiniteDensity('sample contains non-finite values')
        if self.chains is None:
            self.chains = np.arange(len(self.draws))

    def __len__(self):
        return len(self.draws)

    @property
    def columns(self):
        return list(self.draws.columns)

    def mean(self):
        return self.draws.mean()

    def std(self):
        return self.draws.std(ddof=1)

    def effective_size(self, column):
        """Effective sample size, pooling the integrated time over chains."""

        values = self.draws[column].to_numpy(dtype=float)
        chains = [values[self.chains == c] for c in np.unique(self.chains)]
        long_chains = [chain for chain in chains if len(chain) > 1]
        if len(long_chains) == 0:
            return float(len(values))
        tau = np.mean([integrated_time(chain) for chain in long_chains])
        return len(values) / tau

    def mcse(self, column):
        """Monte Carlo standard error of the mean of `column`."""

        return float(self.draws[column].std(ddof=1) / np.sqrt(self.effective_size(column)))

    def to_csv(self, path):
        self.draws.to_csv(path, index=False, float_format='%.10g')


def mh_sample(logdensity, init, config=None, n_iter=None, seed=0, names=None):
    """
    Random-walk Metropolis-Hastings with isotropic Gaussian proposals.

    Every walker of the emcee ensemble is an independent Metropolis-Hastings chain (GaussianMove does not use
    the other walkers).

    Parameters
    ----------
    logdensity : callable
        Maps a parameter vector to its unnormalised log density.
    init : array_like
        Starting point (one vector, copied to every walker) or one row per walker.
    config : SamplerConfig, optional
    n_iter : int, optional
        Iterations per walker (default config.n_outer).
    seed : int, optional
    names : list of str, optional
        Column names (default x0, x1, ...).

    Returns
    -------
    SampleSet
        Draws after burn-in, walker by walker.

    Raises
    ------
    NonFiniteDensity
        If `logdensity` is not finite at the starting point.
    """

    config = config or SamplerConfig()
    n_iter = config.n_outer if n_iter is None else n_iter
    init = np.atleast_1d(np.asarray(init, dtype=float))
    if init.ndim == 1:
        init = np.tile(init, (config.n_walkers, 1))
    n_walkers, ndim = init.shape
    names = [f'x{i}' for i in range(ndim)] if names is None else list(names)
    for row in init:
        if not np.isfinite(logdensity(row)):
            raise NonFiniteDensity(f'log density is not finite at the starting point {row}')

    sampler = emcee.EnsembleSampler(
        n_walkers, ndim, logdensity, moves=emcee.moves.GaussianMove(config.proposal_scale ** 2)
    )
    sampler.random_state = legacy_state(spawn_rng(seed))
    sampler.run_mcmc(init, n_iter, skip_initial_state_check=True, progress=False)

    burn = int(config.burn_in * n_iter)
    chain = sampler.get_chain(discard=burn)
    acceptance = float(np.mean(sampler.acceptance_fraction))
    logger.info('metropolis-hastings acceptance rate %.3f', acceptance)
    if acceptance < LOW_ACCEPTANCE:
        logger.warning('low acceptance rate %.3f; consider a smaller proposal scale', acceptance)
    draws = np.transpose(chain, (1, 0, 2)).reshape(-1, ndim)
    return SampleSet(
        draws=pd.DataFrame(draws, columns=names),
        seed=seed,
        method='mh',
        burn_in=burn,
        acceptance=acceptance,
        chains=np.repeat(np.arange(n_walkers), n_iter - burn),
    )


def sampling_order(cf):
    """
    Factors reordered so that every conditioning parameter is drawn before it is used. The stored order is kept
    where it already works.
    """

    pending = list(cf.factors)
    drawn, ordered = set(), []
    while pending:
        for factor in pending:
            needed = {v for v in factor.conditioning if any(v in f.target for f in cf.factors)}
            if needed <= drawn:
                break
        else:
            raise ModelError(f'factors of {cf.label} condition on each other in a cycle')
        pending.remove(factor)
        ordered.append(factor)
        drawn |= factor.target
    return ordered


def _continuous_stage(model, factor, fixed, config, rng, size):
    nodes = model.coordinates(factor.target | factor.nuisance(model.dag))
    start = model.initial_coordinates(nodes, rng, size)
    model.check_finite(factor.likelihood, nodes, start, fixed)

    def log_prob(coordinates):
        return model.log_density(factor.likelihood, nodes, coordinates, fixed)

    sampler = emcee.EnsembleSampler(
        size, len(nodes), log_prob, moves=emcee.moves.GaussianMove(config.proposal_scale ** 2), vectorize=True
    )
    sampler.random_state = legacy_state(rng)
    sampler.run_mcmc(start, config.n_inner, skip_initial_state_check=True, progress=False)
    acceptance = float(np.mean(sampler.acceptance_fraction))
    logger.info('%s: inner acceptance rate %.3f', factor, acceptance)
    if acceptance < LOW_ACCEPTANCE:
        logger.warning('%s: low acceptance rate %.3f', factor, acceptance)
    values = model.values_from(nodes, sampler.get_last_sample().coords)
    return {node: values[node] for node in factor.target}, acceptance


def _factor_sets(cf):
    return [(factor.target, factor.conditioning) for factor in cf]


def nested_cut_sample(model, cf, evidence=None, config=None, seed=0):
    """
    Draw from a cut factorization stage by stage.

    Parameters
    ----------
    model : DiscreteModel, ContinuousModel or LinGaussModel
    cf : CutFactorization or None
        For a LinGaussModel, None or the chain cut M_1 -> ... -> M_T of `chain_structure`, which is drawn exactly.
    evidence : dict, optional
        Observed values of every observable (not used by LinGaussModel).
    config : SamplerConfig, optional
    seed : int, optional

    Returns
    -------
    SampleSet
        config.n_outer draws over all parameters.

    Raises
    ------
    ModelError
        If cf is not the chain cut of a LinGaussModel, or is missing for any other model.
    """

    config = config or SamplerConfig()
    rng = spawn_rng(seed)
    size = config.n_outer

    if isinstance(model, LinGaussModel):
        if cf is not None and _factor_sets(cf) != _factor_sets(chain_structure(model)[2]):
            raise ModelError(f'a linear-Gaussian model is sampled along its chain cut, {cf.label} is not that cut')
        draws = sample_cut_chain(model, rng, size)
        return SampleSet(pd.DataFrame(draws, columns=model.parameter_names), seed=seed, method='cut')

    if cf is None:
        raise ModelError(f'a cut factorization is needed to sample a {type(model).__name__}')
    evidence = dict(evidence or {})
    draws, acceptance = {}, []
    for stage, factor in enumerate(sampling_order(cf)):
        if isinstance(model, DiscreteModel):
            draws.update(model.sample_factor(factor, evidence, draws, rng, size=size))
        elif isinstance(model, ContinuousModel):
            fixed = {node: float(value) for node, value in evidence.items()}
            fixed.update({node: draws[node] for node in factor.conditioning if node in draws})
            values, rate = _continuous_stage(model, factor, fixed, config, rng, size)
            draws.update(values)
            acceptance.append(rate)
        else:
            raise TypeError(f'cannot sample a model of type {type(model).__name__}')
        logger.debug('stage %d drew %s', stage, sorted_nodes(factor.target))

    columns = sorted_nodes(draws)
    frame = pd.DataFrame({column: draws[column] for column in columns})
    return SampleSet(
        frame, seed=seed, method='cut', acceptance=float(np.mean(acceptance)) if acceptance else None
    )


def standard_sample(model, evidence=None, config=None, seed=0):
    """
    Draws from the standard (full) posterior: exact for discrete and linear-Gaussian models, a single
    Metropolis-Hastings factor over all parameters otherwise.
    """

    config = config or SamplerConfig()
    rng = spawn_rng(seed)
    if isinstance(model, LinGaussModel):
        draws = standard_longitudinal_posterior(model).sample(rng, config.n_outer)
        return SampleSet(pd.DataFrame(draws, columns=model.parameter_names), seed=seed, method='standard')

    dag = model.dag
    evidence = dict(evidence or {})
    if isinstance(model, DiscreteModel):
        posterior = enumerate_posterior(model, dag.parameters, {k: evidence[k] for k in dag.observables})
        index = rng.choice(len(posterior), size=config.n_outer, p=posterior.to_numpy() / posterior.sum())
        states = np.array(list(posterior.index))[index].reshape(config.n_outer, -1)
        names = list(posterior.index.names)
        frame = pd.DataFrame(states, columns=names)[sorted_nodes(names)]
        return SampleSet(frame, seed=seed, method='standard')

    joint = CutFactor(
        target=dag.parameters,
        conditioning=dag.observables,
        source_module='standard',
        kind=FactorKind.MARGINAL_POSTERIOR,
        likelihood=frozenset(dag.nodes),
    )
    sample = nested_cut_sample(model, CutFactorization((joint,), 'standard'), evidence, config, seed)
    sample.method = 'standard'
    return sample
