"""Scalar Gaussian mixture fitting by EM, with warm-start refits.

Used to estimate the marginal density of the channel output; the default
component count equals the trellis state count C^m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import FitFailureError, InvalidParameterError

_LOG_2PI = math.log(2.0 * math.pi)
_WEIGHT_EPS = 1e-8
_RESTART_BUDGET = 5


@dataclass(frozen=True)
class MixtureParams:
    """Weights on the simplex, component means, component variances."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.asarray(self.means, dtype=float)
        var = np.asarray(self.variances, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)
        if not (w.shape == mu.shape == var.shape) or w.ndim != 1:
            raise InvalidParameterError("weights/means/variances must be equal-length vectors")
        if abs(w.sum() - 1.0) > 1e-9 or (w < 0).any():
            raise InvalidParameterError("weights must lie on the simplex")
        if (var <= 0).any():
            raise InvalidParameterError("variances must be positive")

    @property
    def n_components(self):
        return self.weights.size


def _component_log_pdf(params, y):
    """(n, K) matrix of per-component log densities."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    diff = y[:, None] - params.means[None, :]
    return (
        -0.5 * diff * diff / params.variances[None, :]
        - 0.5 * np.log(params.variances)[None, :]
        - 0.5 * _LOG_2PI
    )


def log_density(params, y):
    """Log of the mixture density, numerically stable for far-tail inputs."""
    comp = _component_log_pdf(params, y) + np.log(
        np.maximum(params.weights, 1e-300)
    )
    out = logsumexp(comp, axis=1)
    return out if np.ndim(y) else float(out[0])


def density(params, y):
    """Mixture density sum_k w_k N(y; mu_k, var_k)."""
    out = np.exp(log_density(params, np.atleast_1d(y)))
    return out if np.ndim(y) else float(out[0])


def total_log_likelihood(params, samples):
    return float(np.sum(log_density(params, np.asarray(samples, dtype=float))))


def _kmeanspp_means(samples, k, rng):
    """k-means++ seeding on the sample values."""
    means = np.empty(k)
    means[0] = samples[rng.integers(samples.size)]
    d2 = (samples - means[0]) ** 2
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            means[i:] = samples[rng.integers(samples.size, size=k - i)]
            break
        probs = d2 / total
        means[i] = samples[rng.choice(samples.size, p=probs)]
        d2 = np.minimum(d2, (samples - means[i]) ** 2)
    return means


def _em_loop(samples, weights, means, variances, max_iters, tol, floor):
    """EM iterations from a given start; returns (params, trace, collapsed)."""
    n = samples.size
    trace = []
    params = MixtureParams(weights, means, variances)
    prev_ll = -np.inf
    for _ in range(max_iters):
        log_resp = _component_log_pdf(params, samples) + np.log(
            np.maximum(params.weights, 1e-300)
        )
        norm = logsumexp(log_resp, axis=1, keepdims=True)
        trace.append(float(norm.sum()))
        resp = np.exp(log_resp - norm)

        nk = resp.sum(axis=0)
        weights = nk / n
        safe_nk = np.maximum(nk, 1e-300)
        means = (resp * samples[:, None]).sum(axis=0) / safe_nk
        diff = samples[:, None] - means[None, :]
        variances = (resp * diff * diff).sum(axis=0) / safe_nk
        variances = np.maximum(variances, floor)
        weights = weights / weights.sum()
        params = MixtureParams(weights, means, variances)

        if trace[-1] - prev_ll < tol and len(trace) > 1:
            break
        prev_ll = trace[-1]
    collapsed = bool(
        ((params.variances <= floor * (1 + 1e-12)) & (params.weights < _WEIGHT_EPS)).any()
    )
    return params, np.asarray(trace), collapsed


def em_fit(samples, n_components, max_iters=200, tol=1e-6, seed=0, return_trace=False):
    """Fit a Gaussian mixture by EM with k-means++ seeding.

    Restarts with a fresh seed on component collapse (vanishing weight at the
    variance floor), then raises FitFailureError once the budget is spent.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if n_components < 1:
        raise InvalidParameterError("need at least one component")
    if samples.size < n_components:
        raise InvalidParameterError("need at least as many samples as components")
    floor = _variance_floor(samples)
    if n_components == 1:
        # single-component EM fixed point: moment matching
        var = max(float(samples.var()), floor)
        params = MixtureParams(np.array([1.0]), np.array([samples.mean()]), np.array([var]))
        return (params, np.array([total_log_likelihood(params, samples)])) if return_trace else params

    for attempt in range(_RESTART_BUDGET):
        rng = np.random.default_rng(seed + attempt)
        means = _kmeanspp_means(samples, n_components, rng)
        var0 = max(float(samples.var()) / n_components, floor)
        params, trace, collapsed = _em_loop(
            samples,
            np.full(n_components, 1.0 / n_components),
            means,
            np.full(n_components, var0),
            max_iters,
            tol,
            floor,
        )
        if not collapsed:
            return (params, trace) if return_trace else params
    raise FitFailureError(
        f"mixture fit collapsed in all {_RESTART_BUDGET} restarts (K={n_components})"
    )


def warm_refit(prev, samples, max_iters=50, tol=1e-6, return_trace=False):
    """EM restarted from an existing parameter set (online refits)."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise InvalidParameterError("need at least one sample")
    floor = _variance_floor(samples)
    params, trace, collapsed = _em_loop(
        samples,
        prev.weights.copy(),
        prev.means.copy(),
        np.maximum(prev.variances.copy(), floor),
        max_iters,
        tol,
        floor,
    )
    if collapsed:
        # fall back to a fresh fit rather than keeping a degenerate component
        return em_fit(samples, prev.n_components, max_iters=max_iters, tol=tol, return_trace=return_trace)
    return (params, trace) if return_trace else params


def _variance_floor(samples):
    spread = float(np.var(samples))
    return 1e-6 * spread if spread > 0 else 1e-12
