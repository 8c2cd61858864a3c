import numpy as np
import pytest

from cutgraph.errors import DimensionMismatch, SingularSystem
from cutgraph.stats import (
    GaussianDist, Link, LinGaussModel, accumulation_multipliers, bias_coefficients, conjugate_step,
    cut_longitudinal_posterior, design_matrix, longitudinal_log_density, precision_blocks, sample_cut_chain,
    standard_bias, standard_longitudinal_posterior, step_precision
)


@pytest.fixture
def model():
    return LinGaussModel.simulate(6, 20, np.random.default_rng(11))


def test_gaussian_dist():
    dist = GaussianDist([1., 2.], [[2., .5], [.5, 1.]])
    assert len(dist) == 2
    np.testing.assert_allclose(dist.std, np.sqrt([2., 1.]))
    marginal = dist.marginal(1)
    assert marginal.mean[0] == pytest.approx(2.)
    assert marginal.cov[0, 0] == pytest.approx(1.)
    assert dist.logpdf([1., 2.]) == pytest.approx(-np.log(2 * np.pi) - .5 * np.log(1.75))
    draws = dist.sample(np.random.default_rng(0), size=40000)
    np.testing.assert_allclose(np.cov(draws.T), dist.cov, atol=.05)

    with pytest.raises(DimensionMismatch):
        GaussianDist([0., 0.], np.eye(3))
    with pytest.raises(SingularSystem):
        GaussianDist([0., 0.], [[1., .5], [0., 1.]])
    with pytest.raises(SingularSystem):
        GaussianDist([0., 0.], [[1., 2.], [2., 1.]])


def test_conjugate_step():
    rng = np.random.default_rng(1)
    p, q = rng.normal(size=30), rng.normal(size=30)
    X = 1 + 3 * p + 2 * q + rng.normal(size=30)
    P = np.column_stack([np.ones(30), p])
    step = conjugate_step(p, q, X, theta_prev=2.)
    precision = P.T @ P + np.eye(2)
    np.testing.assert_allclose(step.mean, np.linalg.solve(precision, P.T @ (X - 2 * q)))
    np.testing.assert_allclose(step.cov, np.linalg.inv(precision))
    np.testing.assert_allclose(step_precision(p), precision)

    shifted = conjugate_step(p, q, X, theta_prev=2., link=Link.affine(offset=-1.))
    np.testing.assert_allclose(shifted.mean - step.mean, np.array(bias_coefficients(p, q)))

    with pytest.raises(ValueError):
        conjugate_step(p, q, X)
    with pytest.raises(DimensionMismatch):
        conjugate_step(p, q[:10], X, theta_prev=0.)
    with pytest.raises(DimensionMismatch):
        conjugate_step(np.ones((30, 3)), None, X)


def test_bias_coefficients():
    rng = np.random.default_rng(2)
    p, q = rng.normal(size=50), rng.normal(size=50)
    P = np.column_stack([np.ones(50), p])
    expected = np.linalg.solve(P.T @ P + np.eye(2), P.T @ q)
    np.testing.assert_allclose(bias_coefficients(P, q), expected)
    with pytest.raises(DimensionMismatch):
        bias_coefficients(p, q[:-1])


def test_simulate(model):
    assert model.T == 6
    assert model.n == 20
    assert model.P.shape == (6, 20, 2)
    assert np.all(model.Q[0] == 0)
    np.testing.assert_allclose(model.theta, 10 * np.sin(np.arange(1, 7)))
    assert model.parameter_names[:4] == ['a_1', 'theta_1', 'a_2', 'theta_2']
    assert model.with_offset(-2.).offset == -2.

    dag = model.to_dag()
    assert len(dag) == 18
    assert len(dag.edges) == 3 * 6 - 1
    assert dag.parents('X_3') == {'a_3', 'theta_3', 'theta_2'}
    assert model.partition()['M_2'] == {'X_2'}

    with pytest.raises(ValueError):
        LinGaussModel.simulate(1, 20, np.random.default_rng(0))
    with pytest.raises(DimensionMismatch):
        LinGaussModel(model.P[:, :5], model.Q, model.X, model.theta, model.intercept)


def test_precision_blocks(model):
    B = design_matrix(model)
    assert B.shape == (6 * 20, 12)
    precision = B.T @ B + np.eye(12)
    diagonal, off_diagonal = precision_blocks(model)
    for t in range(6):
        np.testing.assert_allclose(diagonal[t], precision[2 * t:2 * t + 2, 2 * t:2 * t + 2])
    for t in range(1, 6):
        np.testing.assert_allclose(off_diagonal[t - 1], precision[2 * t - 2:2 * t, 2 * t:2 * t + 2])
    assert np.all(precision[0:2, 4:] == 0)


def test_standard_posterior_is_exact_for_identity_link(model):
    biased = model.with_offset(-2.)
    posterior = standard_longitudinal_posterior(biased)
    precision = np.linalg.inv(posterior.cov)
    rng = np.random.default_rng(3)
    at_mean = longitudinal_log_density(biased, posterior.mean)
    for _ in range(5):
        step = rng.normal(scale=.1, size=12)
        change = longitudinal_log_density(biased, posterior.mean + step) - at_mean
        assert change == pytest.approx(-.5 * step @ precision @ step, rel=1e-6, abs=1e-9)

    unbiased = standard_longitudinal_posterior(model)
    np.testing.assert_allclose(posterior.mean - unbiased.mean, standard_bias(biased), atol=1e-9)
    assert np.all(standard_bias(model) == 0)
    with pytest.raises(DimensionMismatch):
        longitudinal_log_density(model, np.zeros(5))


def test_cut_marginals_match_chain_draws(model):
    biased = model.with_offset(2.)
    marginals = cut_longitudinal_posterior(biased)
    assert len(marginals) == 6
    draws = sample_cut_chain(biased, np.random.default_rng(4), 20000)
    assert draws.shape == (20000, 12)
    means = np.concatenate([m.mean for m in marginals])
    variances = np.concatenate([np.diag(m.cov) for m in marginals])
    np.testing.assert_allclose(draws.mean(axis=0), means, atol=.02)
    np.testing.assert_allclose(draws.var(axis=0), variances, rtol=.06)


def test_cut_bias_accumulation(model):
    delta = -2.
    unbiased = cut_longitudinal_posterior(model)
    biased = cut_longitudinal_posterior(model.with_offset(delta))
    shifts = [b.mean - u.mean for b, u in zip(biased, unbiased)]
    np.testing.assert_allclose(shifts[0], 0.)
    upsilon = accumulation_multipliers(model)
    np.testing.assert_allclose(upsilon[:2], 0.)
    for t in range(1, 6):
        gain = np.array(bias_coefficients(model.P[t], model.Q[t]))
        np.testing.assert_allclose(shifts[t], -gain * (shifts[t - 1][1] + delta), atol=1e-10)
        np.testing.assert_allclose(shifts[t], -gain * delta * (1 - upsilon[t]), atol=1e-10)
