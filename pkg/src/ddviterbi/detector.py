"""Per-step state costs for the trellis: learned (classifier + mixture) and
model-based (exact channel likelihoods), plus block detection and model I/O.

The learned cost converts the classifier posterior into a conditional
likelihood via Bayes' rule with a uniform prior over the C^m windows:
p(y | s) = P(s | y) * p(y) * C^m. The p(y) and C^m factors are constant
across states at a given step, so detection decisions depend only on the
posterior; they are kept so the costs remain calibrated likelihoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import gmm, mlp
from .channels import GAUSSIAN, POISSON, AlphaStable, Constellation, PdfTable
from .errors import InvalidParameterError, InvalidScenarioError
from .gmm import MixtureParams
from .mlp import ClassifierParams
from .trellis import TrellisSpec, run_trellis

_LOG_FLOOR = 1e-300
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

MODEL_FILE_VERSION = 1


@dataclass(frozen=True)
class LikelihoodModel:
    """Trained classifier + mixture pair bound to a constellation."""

    classifier: ClassifierParams
    mixture: MixtureParams
    constellation: Constellation

    def __post_init__(self):
        if self.classifier.n_classes != self.constellation.n_states:
            raise InvalidScenarioError("classifier output width must equal C^m")

    @property
    def trellis_spec(self):
        return TrellisSpec(self.constellation.size, self.constellation.memory)


def state_means(profile, constellation):
    """Noise-free output sqrt(snr)*h.s for every state window, oldest first."""
    spec = TrellisSpec(constellation.size, constellation.memory)
    windows = np.asarray(constellation.points)[spec.state_windows()]
    # y[i] pairs tap tau with symbol s[i - tau]: newest symbol gets taps[0]
    return math.sqrt(profile.snr) * windows @ profile.taps[::-1]


def learned_costs(model, y, printed_form=False):
    """Negative log-likelihood estimate for each state at output value y.

    ``printed_form=True`` divides by C^m instead of multiplying; the two
    differ by a state-independent constant and yield identical detections.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvalidParameterError("channel output must be finite")
    log_post = mlp.log_posterior(model.classifier, np.atleast_1d(y))
    log_marg = gmm.log_density(model.mixture, np.atleast_1d(y))
    log_states = model.constellation.memory * math.log(model.constellation.size)
    if printed_form:
        log_states = -log_states
    costs = -(log_post + log_marg[:, None] + log_states)
    return costs if y.ndim else costs[0]


def model_based_costs(profile, constellation, y, stable_table=None):
    """Exact negative log-likelihoods under the true channel model."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvalidParameterError("channel output must be finite")
    yy = np.atleast_1d(y)
    means = state_means(profile, constellation)
    if profile.noise == GAUSSIAN:
        resid = yy[:, None] - means[None, :]
        costs = 0.5 * resid * resid + _HALF_LOG_2PI
    elif profile.noise == POISSON:
        if np.any(yy < 0) or np.any(yy != np.rint(yy)):
            raise InvalidParameterError("Poisson outputs must be nonnegative integers")
        lam = means + 1.0
        costs = np.full((yy.size, means.size), np.inf)
        valid = lam > 0
        lv = lam[valid]
        costs[:, valid] = lv[None, :] - yy[:, None] * np.log(lv)[None, :] + gammaln(yy + 1.0)[:, None]
    elif isinstance(profile.noise, AlphaStable):
        if stable_table is None:
            raise InvalidScenarioError("alpha-stable costs need a tabulated density")
        pdf = stable_table.lookup(yy[:, None] - means[None, :])
        costs = -np.log(np.maximum(pdf, _LOG_FLOOR))
    else:
        raise InvalidScenarioError(f"unknown noise family: {profile.noise!r}")
    return costs if y.ndim else costs[0]


def detect_block_costs(cost_matrix, constellation, on_decision=None):
    """Run the trellis on a precomputed (T, C^m) cost matrix."""
    cost_matrix = np.asarray(cost_matrix, dtype=float)
    spec = TrellisSpec(constellation.size, constellation.memory)
    run = run_trellis(lambda k: cost_matrix[k], cost_matrix.shape[0], spec, on_decision)
    return np.asarray(constellation.points)[run.decisions]


def detect_block(model, y, printed_form=False, on_decision=None):
    """Detect a block with the learned likelihood model."""
    costs = learned_costs(model, np.asarray(y, dtype=float), printed_form=printed_form)
    return detect_block_costs(costs, model.constellation, on_decision)


def detect_block_model_based(profile, constellation, y, stable_table=None, on_decision=None):
    """Detect a block with exact (or tabulated) channel likelihoods."""
    costs = model_based_costs(profile, constellation, np.asarray(y, dtype=float), stable_table)
    return detect_block_costs(costs, constellation, on_decision)


def window_labels(symbols, constellation):
    """State label for every output index: the length-m window ending there.

    The first m-1 windows are padded with the reference symbol (first
    constellation point), mirroring the channel's zero-padded leading outputs.
    """
    idx = constellation.index_of(symbols)
    padded = np.concatenate([np.zeros(constellation.memory - 1, dtype=np.int64), idx])
    windows = np.lib.stride_tricks.sliding_window_view(padded, constellation.memory)
    weights = constellation.size ** np.arange(constellation.memory - 1, -1, -1)
    return windows @ weights


def fit_model(
    outputs,
    symbols,
    constellation,
    epochs=100,
    lr=1e-3,
    batch_size=128,
    seed=0,
    em_max_iters=200,
    em_tol=1e-6,
):
    """Train the classifier and fit the output mixture from one labeled set."""
    outputs = np.asarray(outputs, dtype=float).ravel()
    labels = window_labels(symbols, constellation)
    if outputs.size != labels.size:
        raise InvalidParameterError("outputs and symbols must be aligned")
    classifier = mlp.init(constellation.n_states, seed=seed)
    classifier = mlp.train(
        classifier, outputs, labels, epochs=epochs, lr=lr, batch_size=batch_size, seed=seed
    )
    mixture = gmm.em_fit(
        outputs, constellation.n_states, max_iters=em_max_iters, tol=em_tol, seed=seed
    )
    return LikelihoodModel(classifier=classifier, mixture=mixture, constellation=constellation)


def save_model(path, model):
    """Serialize classifier + mixture + constellation to one .npz file."""
    payload = {
        "version": np.array([MODEL_FILE_VERSION]),
        "constellation_points": np.asarray(model.constellation.points),
        "memory": np.array([model.constellation.memory]),
        "input_shift": np.array([model.classifier.input_shift]),
        "input_scale": np.array([model.classifier.input_scale]),
        "mix_weights": model.mixture.weights,
        "mix_means": model.mixture.means,
        "mix_variances": model.mixture.variances,
        "n_layers": np.array([len(model.classifier.weights)]),
    }
    for i, (w, b) in enumerate(zip(model.classifier.weights, model.classifier.biases)):
        payload[f"w{i}"] = w
        payload[f"b{i}"] = b
    np.savez(path, **payload)


def load_model(path):
    with np.load(path) as data:
        version = int(data["version"][0])
        if version != MODEL_FILE_VERSION:
            raise InvalidParameterError(f"unsupported model file version {version}")
        n_layers = int(data["n_layers"][0])
        classifier = ClassifierParams(
            weights=tuple(data[f"w{i}"] for i in range(n_layers)),
            biases=tuple(data[f"b{i}"] for i in range(n_layers)),
            input_shift=float(data["input_shift"][0]),
            input_scale=float(data["input_scale"][0]),
        )
        mixture = MixtureParams(
            weights=data["mix_weights"],
            means=data["mix_means"],
            variances=data["mix_variances"],
        )
        constellation = Constellation(
            points=tuple(data["constellation_points"]),
            memory=int(data["memory"][0]),
        )
    return LikelihoodModel(classifier=classifier, mixture=mixture, constellation=constellation)
