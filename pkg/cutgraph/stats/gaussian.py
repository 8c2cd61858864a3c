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
Sequential Gaussian regression with a misspecified link to the previous timepoint.

At time t the observations are X_t ~ N(P_t nu_t + Q_t f(theta_{t-1}), I) with nu_t = (a_t, theta_t), P_t an n x 2
design with a leading column of ones, and the prior nu_t ~ N(0, I). The analysis link is f = f* + delta.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg
import scipy.stats

from cutgraph.errors import DimensionMismatch, SingularSystem
from cutgraph.graph.dag import Dag
from cutgraph.modules.construction import construct_module
from cutgraph.modules.factorization import cut_general
from cutgraph.modules.ordering import OrderingGraph

logger = logging.getLogger(__name__)


class Link(NamedTuple):
    function: Callable
    derivative: Callable

    @classmethod
    def affine(cls, slope=1., offset=0.):
        return cls(lambda theta: slope * np.asarray(theta) + offset, lambda theta: slope + 0 * np.asarray(theta))

    def shifted(self, delta):
        function, derivative = self.function, self.derivative
        return Link(lambda theta: function(theta) + delta, derivative)


IDENTITY = Link.affine()


class GaussianDist:

    def __init__(self, mean, cov):
        """
        Multivariate normal distribution.

        Raises
        ------
        DimensionMismatch
            If the mean and covariance do not conform.
        SingularSystem
            If the covariance is not symmetric positive definite.
        """

        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if self.cov.shape != (len(self.mean), len(self.mean)):
            raise DimensionMismatch(f'covariance of shape {self.cov.shape} for a mean of length {len(self.mean)}')
        if not np.allclose(self.cov, self.cov.T, rtol=0, atol=1e-10):
            raise SingularSystem('covariance matrix is not symmetric')
        try:
            self.__cholesky = scipy.linalg.cholesky(self.cov, lower=True)
        except np.linalg.LinAlgError:
            raise SingularSystem('covariance matrix is not positive definite')

    def __repr__(self):
        return f'GaussianDist(dim={len(self.mean)})'

    def __len__(self):
        return len(self.mean)

    @property
    def std(self):
        return np.sqrt(np.diag(self.cov))

    def marginal(self, indices):
        indices = np.atleast_1d(indices)
        return GaussianDist(self.mean[indices], self.cov[np.ix_(indices, indices)])

    def sample(self, rng, size=1):
        z = rng.standard_normal((size, len(self.mean)))
        return self.mean + z @ self.__cholesky.T

    def logpdf(self, x):
        return scipy.stats.multivariate_normal(self.mean, self.cov).logpdf(x)


def _design(P):
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = np.column_stack([np.ones(len(P)), P])
    if P.ndim != 2 or P.shape[1] != 2:
        raise DimensionMismatch(f'design matrix must be n x 2, got shape {P.shape}')
    return P


def step_precision(P):
    """Lambda_t = P_t^T P_t + I."""

    P = _design(P)
    return P.T @ P + np.eye(2)


def conjugate_step(P, Q, X, theta_prev=None, link=IDENTITY):
    """
    Posterior of nu_t = (a_t, theta_t) given X_t and theta_{t-1} under the N(0, I) prior.

    Parameters
    ----------
    P : array_like
        n x 2 design matrix (or the n covariates p, in which case the intercept column is added).
    Q : array_like or None
        Past covariates q; None or zeros for the first timepoint.
    X : array_like
        n observations.
    theta_prev : float, optional
        Value of theta_{t-1}; ignored when Q is None.
    link : Link, optional
        Analysis link f (default identity).

    Returns
    -------
    GaussianDist
        Mean Lambda_t^-1 P_t^T (X_t - Q_t f(theta_{t-1})), covariance Lambda_t^-1.
    """

    P = _design(P)
    X = np.asarray(X, dtype=float)
    if X.shape != (len(P),):
        raise DimensionMismatch(f'{len(P)} design rows but observations of shape {X.shape}')
    residual = X
    if Q is not None:
        Q = np.asarray(Q, dtype=float)
        if Q.shape != X.shape:
            raise DimensionMismatch(f'past covariates of shape {Q.shape} for observations of shape {X.shape}')
        if theta_prev is None:
            raise ValueError('<theta_prev> is required when past covariates are given')
        residual = X - Q * float(link.function(theta_prev))
    factor = scipy.linalg.cho_factor(step_precision(P))
    return GaussianDist(scipy.linalg.cho_solve(factor, P.T @ residual), scipy.linalg.cho_solve(factor, np.eye(2)))


def bias_coefficients(P, Q):
    """
    Closed form of K_t = Lambda_t^-1 P_t^T Q_t, the shift of the posterior mean of (a_t, theta_t) per unit of
    link offset.

    Returns
    -------
    tuple
        (K_t1, K_t2) for the intercept and for theta_t.
    """

    p = _design(P)[:, 1]
    q = np.asarray(Q, dtype=float)
    if q.shape != p.shape:
        raise DimensionMismatch(f'{len(p)} covariates p but q of shape {q.shape}')
    n = len(p)
    sp, sp2, sq, spq = p.sum(), (p ** 2).sum(), q.sum(), (p * q).sum()
    denominator = (n + 1) * (sp2 + 1) - sp ** 2
    return ((sp2 + 1) * sq - sp * spq) / denominator, ((n + 1) * spq - sp * sq) / denominator


@dataclass(frozen=True)
class LinGaussModel:
    """
    Simulated longitudinal data set.

    P : (T, n, 2) designs; Q : (T, n) past covariates with Q[0] unused; X : (T, n) observations;
    theta, intercept : true values; true_link : f*; offset : delta, so the analysis link is f* + delta.
    """

    P: np.ndarray
    Q: np.ndarray
    X: np.ndarray
    theta: np.ndarray
    intercept: np.ndarray
    offset: float = 0.
    true_link: Link = field(default=IDENTITY)

    def __post_init__(self):
        T, n = np.shape(self.X)
        if np.shape(self.P) != (T, n, 2) or np.shape(self.Q) != (T, n):
            raise DimensionMismatch(f'P {np.shape(self.P)} and Q {np.shape(self.Q)} do not conform to X {(T, n)}')
        if not np.allclose(np.asarray(self.P)[:, :, 0], 1):
            raise DimensionMismatch('the first design column must be all ones')

    @property
    def T(self):
        return self.X.shape[0]

    @property
    def n(self):
        return self.X.shape[1]

    @property
    def link(self):
        return self.true_link.shifted(self.offset)

    @property
    def parameter_names(self):
        return [name for t in range(1, self.T + 1) for name in (f'a_{t}', f'theta_{t}')]

    def with_offset(self, offset):
        return LinGaussModel(self.P, self.Q, self.X, self.theta, self.intercept, offset, self.true_link)

    @classmethod
    def simulate(cls, T, n, rng, offset=0., **kwargs):
        """
        Draw covariates and observations from the true process.

        Parameters
        ----------
        T, n : int
            Timepoints and observations per timepoint (both at least 2).
        rng : numpy.random.Generator
        offset : float, optional
            Link offset delta used by the analysis model (default=0).
        kwargs
            theta : array_like, optional
                True theta_t (default 10 sin(t)).
            intercept : array_like, optional
                True a_t (default 0).
            true_link : Link, optional
                f* (default identity).
            covariate_scale : float, optional
                Standard deviation of the mean-zero covariates (default=1).

        Returns
        -------
        LinGaussModel
        """

        times = np.arange(1, T + 1)
        theta = np.asarray(kwargs.pop('theta', 10 * np.sin(times)), dtype=float)
        intercept = np.asarray(kwargs.pop('intercept', np.zeros(T)), dtype=float)
        true_link = kwargs.pop('true_link', IDENTITY)
        covariate_scale = kwargs.pop('covariate_scale', 1.)
        assert len(kwargs) == 0, f'unrecognized arguments passed in: {", ".join(kwargs.keys())}'
        if T < 2 or n < 2:
            raise ValueError(f'<T> and <n> must be at least 2, got T={T}, n={n}')

        p = rng.normal(0, covariate_scale, size=(T, n))
        q = rng.normal(0, covariate_scale, size=(T, n))
        q[0] = 0
        P = np.stack([np.ones((T, n)), p], axis=-1)
        mean = intercept[:, None] + p * theta[:, None]
        mean[1:] += q[1:] * np.asarray(true_link.function(theta[:-1]))[:, None]
        X = mean + rng.standard_normal((T, n))
        logger.debug('simulated %d timepoints of %d observations', T, n)
        return cls(P, q, X, theta, intercept, float(offset), true_link)

    def to_dag(self):
        """DAG of the model: a_t and theta_t feed X_t, theta_{t-1} feeds X_t."""

        nodes = []
        edges = []
        for t in range(1, self.T + 1):
            nodes += [(f'a_{t}', 'parameter'), (f'theta_{t}', 'parameter'), (f'X_{t}', 'observable')]
            edges += [(f'a_{t}', f'X_{t}'), (f'theta_{t}', f'X_{t}')]
            if t > 1:
                edges.append((f'theta_{t - 1}', f'X_{t}'))
        return Dag(nodes, edges)

    def partition(self):
        return {f'M_{t}': {f'X_{t}'} for t in range(1, self.T + 1)}


def chain_structure(model):
    """
    Per-time modules of a longitudinal model, the chain ordering M_1 -> ... -> M_T and the cut factorization.
    """

    dag = model.to_dag()
    modules = [construct_module(dag, label, block) for label, block in model.partition().items()]
    labels = [module.label for module in modules]
    ordering = OrderingGraph(labels, list(zip(labels[:-1], labels[1:])))
    return modules, ordering, cut_general(dag, modules, ordering, label='cut')


def _slopes(model, points):
    points = model.theta if points is None else np.asarray(points, dtype=float)
    if points.shape != (model.T,):
        raise DimensionMismatch(f'{model.T} linearisation points expected, got shape {points.shape}')
    return points, np.asarray(model.true_link.derivative(points), dtype=float) + np.zeros(model.T)


def design_matrix(model, points=None):
    """
    Dense B of the linearised joint model, with column pairs (a_t, theta_t) and theta_{t-1} entering the rows of
    time t through m_{t-1} q_t.
    """

    _, slopes = _slopes(model, points)
    T, n = model.T, model.n
    B = np.zeros((T * n, 2 * T))
    for t in range(T):
        rows = slice(t * n, (t + 1) * n)
        B[rows, 2 * t:2 * t + 2] = model.P[t]
        if t > 0:
            B[rows, 2 * t - 1] = slopes[t - 1] * model.Q[t]
    return B


def precision_blocks(model, points=None):
    """
    Blocks of Lambda = B^T B + I in closed form.

    Returns
    -------
    tuple
        (diagonal, off_diagonal): diagonal[t] is the 2 x 2 block of time t; off_diagonal[t - 1] couples time
        t - 1 (rows) with time t (columns). Only the theta_{t-1} row of a coupling block is non-zero.
    """

    _, slopes = _slopes(model, points)
    diagonal, off_diagonal = [], []
    for t in range(model.T):
        block = step_precision(model.P[t])
        if t < model.T - 1:
            block[1, 1] += ((slopes[t] * model.Q[t + 1]) ** 2).sum()
        diagonal.append(block)
        if t > 0:
            p, q = model.P[t][:, 1], model.Q[t]
            coupling = np.zeros((2, 2))
            coupling[1] = slopes[t - 1] * np.array([q.sum(), (p * q).sum()])
            off_diagonal.append(coupling)
    return diagonal, off_diagonal


def _linearised_observations(model, points, link):
    points, slopes = _slopes(model, points)
    X = np.array(model.X, dtype=float)
    values = np.asarray(link.function(points[:-1]), dtype=float)
    X[1:] -= model.Q[1:] * (values - slopes[:-1] * points[:-1])[:, None]
    return X.reshape(-1)


def standard_longitudinal_posterior(model, points=None):
    """
    Standard posterior of all nu_t under the analysis link, linearised around `points` (default: true theta).

    The mean is Lambda^-1 B^T X~ with X~_t = X_t - Q_t f(theta*_{t-1}) + Q_t m_{t-1} theta*_{t-1}, and the
    covariance Lambda^-1, where Lambda = B^T B + I.

    Returns
    -------
    GaussianDist
        Over (a_1, theta_1, ..., a_T, theta_T).
    """

    B = design_matrix(model, points)
    precision = B.T @ B + np.eye(B.shape[1])
    try:
        factor = scipy.linalg.cho_factor(precision)
    except np.linalg.LinAlgError:
        raise SingularSystem('precision matrix of the joint model is not positive definite')
    X = _linearised_observations(model, points, model.link)
    mean = scipy.linalg.cho_solve(factor, B.T @ X)
    cov = scipy.linalg.cho_solve(factor, np.eye(B.shape[1]))
    return GaussianDist(mean, (cov + cov.T) / 2)


def standard_bias(model, points=None):
    """
    Shift of the standard posterior mean caused by the link offset: -Lambda^-1 B^T (0, Q_2, ..., Q_T) delta.
    """

    B = design_matrix(model, points)
    precision = B.T @ B + np.eye(B.shape[1])
    past = np.array(model.Q, dtype=float)
    past[0] = 0
    return -scipy.linalg.solve(precision, B.T @ past.reshape(-1), assume_a='pos') * model.offset


def cut_longitudinal_posterior(model):
    """
    Marginal cut posterior of every nu_t for the chain of per-time modules, each feeding only the next.

    The chain is propagated forward: nu_t given theta_{t-1} is the conjugate step, and theta_{t-1} is
    integrated over its own cut marginal. The result is exact for affine links and uses the link linearised at
    the previous mean otherwise.

    Returns
    -------
    list of GaussianDist
        One 2-dimensional marginal per timepoint.
    """

    link = model.link
    marginals = []
    for t in range(model.T):
        if t == 0:
            marginals.append(conjugate_step(model.P[0], None, model.X[0]))
            continue
        previous = marginals[-1]
        mean_prev, var_prev = previous.mean[1], previous.cov[1, 1]
        step = conjugate_step(model.P[t], model.Q[t], model.X[t], mean_prev, link)
        gain = np.array(bias_coefficients(model.P[t], model.Q[t]))
        slope = float(link.derivative(mean_prev))
        marginals.append(GaussianDist(step.mean, step.cov + slope ** 2 * var_prev * np.outer(gain, gain)))
    return marginals


def sample_cut_chain(model, rng, size):
    """
    Joint draws from the cut distribution of the per-time module chain: each nu_t is drawn from its conjugate
    step given the drawn theta_{t-1}.

    Returns
    -------
    np.ndarray
        Array of shape (size, 2 T) in the order of `LinGaussModel.parameter_names`.
    """

    link = model.link
    draws = np.empty((size, 2 * model.T))
    for t in range(model.T):
        P = model.P[t]
        factor = scipy.linalg.cho_factor(step_precision(P))
        cov = scipy.linalg.cho_solve(factor, np.eye(2))
        cholesky = scipy.linalg.cholesky((cov + cov.T) / 2, lower=True)
        residual = np.tile(model.X[t], (size, 1))
        if t > 0:
            residual = residual - np.asarray(link.function(draws[:, 2 * t - 1]))[:, None] * model.Q[t]
        mean = scipy.linalg.cho_solve(factor, P.T @ residual.T).T
        draws[:, 2 * t:2 * t + 2] = mean + rng.standard_normal((size, 2)) @ cholesky.T
    return draws


def accumulation_multipliers(model, points=None):
    """
    Accumulation term Upsilon_{t-1} = sum_{i=1}^{t-2} (-1)^(i+1) prod_{j=t-i}^{t-1} m_j K_{j2} for every t.

    The cut bias at time t is then approximately K_t (1 - Upsilon_{t-1}) delta. Diagnostic only: it rests on a
    first order expansion of the link.

    Returns
    -------
    np.ndarray
        Upsilon for t = 1..T (zero for t <= 2).
    """

    _, slopes = _slopes(model, points)
    k2 = np.zeros(model.T + 1)
    for j in range(2, model.T + 1):
        k2[j] = bias_coefficients(model.P[j - 1], model.Q[j - 1])[1]
    m = np.concatenate([[0.], slopes])
    upsilon = np.zeros(model.T)
    for t in range(3, model.T + 1):
        total = 0.
        for i in range(1, t - 1):
            total += (-1) ** (i + 1) * np.prod([m[j] * k2[j] for j in range(t - i, t)])
        upsilon[t - 1] = total
    return upsilon


def longitudinal_log_density(model, nu):
    """
    Unnormalised log posterior of (a_1, theta_1, ..., a_T, theta_T) under the analysis link, without
    linearisation: X_t ~ N(a_t + p_t theta_t + q_t f(theta_{t-1}), 1) and nu ~ N(0, I).
    """

    nu = np.asarray(nu, dtype=float)
    if nu.shape != (2 * model.T,):
        raise DimensionMismatch(f'{2 * model.T} parameters expected, got shape {nu.shape}')
    a, theta = nu[0::2], nu[1::2]
    mean = a[:, None] + model.P[:, :, 1] * theta[:, None]
    mean[1:] += model.Q[1:] * np.asarray(model.link.function(theta[:-1]), dtype=float)[:, None]
    return -.5 * np.sum((model.X - mean) ** 2) - .5 * np.sum(nu ** 2)
