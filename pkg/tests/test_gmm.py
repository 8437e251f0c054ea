"""Mixture fitting: EM monotonicity, moment recovery, density normalization."""

import math

import numpy as np
import pytest
from scipy import integrate

from ddviterbi import gmm
from ddviterbi.errors import InvalidParameterError


def test_single_component_closed_form():
    rng = np.random.default_rng(0)
    samples = rng.normal(1.5, 2.0, 5000)
    params = gmm.em_fit(samples, 1)
    assert params.means[0] == pytest.approx(samples.mean())
    assert params.variances[0] == pytest.approx(samples.var())
    assert params.weights[0] == 1.0


def test_single_gaussian_moment_recovery():
    rng = np.random.default_rng(1)
    mu0, sigma0 = -2.0, 1.5
    samples = rng.normal(mu0, sigma0, 10000)
    params = gmm.em_fit(samples, 1)
    se = sigma0 / math.sqrt(samples.size)
    assert abs(params.means[0] - mu0) < 3 * se
    assert abs(params.variances[0] - sigma0**2) < 0.1 * sigma0**2


def test_em_log_likelihood_monotone():
    rng = np.random.default_rng(2)
    centers = np.array([-4.0, 0.0, 5.0])
    samples = (rng.choice(centers, 3000) + rng.normal(0, 0.8, 3000))
    _, trace = gmm.em_fit(samples, 3, return_trace=True)
    assert np.all(np.diff(trace) >= -1e-9)


def test_density_standard_normal_peak():
    params = gmm.MixtureParams(np.array([1.0]), np.array([0.0]), np.array([1.0]))
    assert gmm.density(params, 0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi))


def test_density_integrates_to_one():
    rng = np.random.default_rng(3)
    samples = np.concatenate([rng.normal(-2, 0.5, 2000), rng.normal(3, 1.5, 2000)])
    params = gmm.em_fit(samples, 2)
    span = 50 * math.sqrt(params.variances.max())
    lo = params.means.min() - span
    hi = params.means.max() + span
    total, _ = integrate.quad(lambda y: gmm.density(params, y), lo, hi, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_density_permutation_invariant():
    params = gmm.MixtureParams(
        np.array([0.2, 0.5, 0.3]), np.array([-1.0, 0.0, 2.0]), np.array([0.5, 1.0, 2.0])
    )
    perm = [2, 0, 1]
    shuffled = gmm.MixtureParams(
        params.weights[perm], params.means[perm], params.variances[perm]
    )
    y = np.linspace(-5, 5, 50)
    assert np.allclose(gmm.density(params, y), gmm.density(shuffled, y))


def test_fit_recovers_separated_means():
    rng = np.random.default_rng(4)
    samples = np.concatenate([rng.normal(-5, 0.4, 3000), rng.normal(5, 0.4, 3000)])
    params = gmm.em_fit(samples, 2)
    means = np.sort(params.means)
    assert means[0] == pytest.approx(-5.0, abs=0.1)
    assert means[1] == pytest.approx(5.0, abs=0.1)


def test_fit_deterministic():
    rng = np.random.default_rng(5)
    samples = rng.normal(size=2000)
    a = gmm.em_fit(samples, 3, seed=7)
    b = gmm.em_fit(samples, 3, seed=7)
    assert np.array_equal(a.means, b.means)
    assert np.array_equal(a.weights, b.weights)


def test_warm_refit_fixed_point():
    rng = np.random.default_rng(6)
    prev = gmm.MixtureParams(
        np.array([0.5, 0.5]), np.array([-3.0, 3.0]), np.array([1.0, 1.0])
    )
    comp = rng.integers(0, 2, 4000)
    samples = prev.means[comp] + rng.normal(0, 1.0, 4000)
    refit, trace = gmm.warm_refit(prev, samples, tol=1e-6, return_trace=True)
    # starting at (approximately) the generating parameters, EM moves little
    assert np.allclose(np.sort(refit.means), prev.means, atol=0.1)
    assert np.all(np.diff(trace) >= -1e-9)


def test_warm_refit_tracks_drifted_means():
    rng = np.random.default_rng(7)
    prev = gmm.MixtureParams(
        np.array([0.5, 0.5]), np.array([-3.0, 3.0]), np.array([1.0, 1.0])
    )
    drifted = prev.means + 0.4
    comp = rng.integers(0, 2, 2040)
    samples = drifted[comp] + rng.normal(0, 1.0, 2040)
    refit = gmm.warm_refit(prev, samples, max_iters=50)
    se = 1.0 / math.sqrt(1020)
    assert np.all(np.abs(np.sort(refit.means) - drifted) < 3 * se)


def test_validation_errors():
    with pytest.raises(InvalidParameterError):
        gmm.em_fit(np.ones(2), 3)
    with pytest.raises(InvalidParameterError):
        gmm.em_fit(np.ones(5), 0)
    with pytest.raises(InvalidParameterError):
        gmm.MixtureParams(np.array([0.5, 0.4]), np.zeros(2), np.ones(2))
    with pytest.raises(InvalidParameterError):
        gmm.MixtureParams(np.array([0.5, 0.5]), np.zeros(2), np.array([1.0, 0.0]))
