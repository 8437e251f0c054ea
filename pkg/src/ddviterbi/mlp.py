"""Small fully connected classifier mapping a scalar channel output to a
posterior over the C^m symbol windows.

Architecture: 1 -> 100 -> 50 -> n_classes with sigmoid, ReLU, and softmax
activations. Trained with Adam on cross-entropy. Pure numpy; deterministic
given seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError, TrainingDivergedError

DEFAULT_HIDDEN = (100, 50)


@dataclass(frozen=True)
class ClassifierParams:
    """Layer weights/biases plus the stored input standardization."""

    weights: tuple  # (in, out) matrices
    biases: tuple
    input_shift: float = 0.0
    input_scale: float = 1.0

    @property
    def n_classes(self):
        return self.weights[-1].shape[1]

    def flatten(self):
        return np.concatenate([w.ravel() for w in self.weights] + [b.ravel() for b in self.biases])


def init(n_classes, seed, hidden=DEFAULT_HIDDEN):
    """Glorot-uniform initialization of the 1 -> hidden -> n_classes stack."""
    if n_classes < 2:
        raise InvalidParameterError("need at least two classes")
    rng = np.random.default_rng(seed)
    dims = (1, *hidden, n_classes)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return ClassifierParams(tuple(weights), tuple(biases))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _forward(params, y):
    """Activations for a batch of scalar inputs. Returns (a1, a2, probs)."""
    x = (np.asarray(y, dtype=float).reshape(-1, 1) - params.input_shift) / params.input_scale
    w1, w2, w3 = params.weights
    b1, b2, b3 = params.biases
    a1 = _sigmoid(x @ w1 + b1)
    a2 = np.maximum(x_out := a1 @ w2 + b2, 0.0)
    logits = a2 @ w3 + b3
    logits -= logits.max(axis=1, keepdims=True)
    ex = np.exp(logits)
    probs = ex / ex.sum(axis=1, keepdims=True)
    return x, a1, a2, x_out, probs


def posterior(params, y):
    """Softmax posterior over the C^m windows for a scalar output value."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvalidParameterError("classifier input must be finite")
    probs = _forward(params, np.atleast_1d(y))[-1]
    return probs if y.ndim else probs[0]


def log_posterior(params, y):
    return np.log(np.maximum(posterior(params, y), 1e-300))


def cross_entropy(params, y, labels):
    """Mean cross-entropy of the batch (natural log)."""
    probs = _forward(params, y)[-1]
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


def _gradients(params, y, labels):
    """Analytic gradients of the mean cross-entropy for one batch."""
    x, a1, a2, pre2, probs = _forward(params, y)
    n = x.shape[0]
    w1, w2, w3 = params.weights

    delta3 = probs.copy()
    delta3[np.arange(n), labels] -= 1.0
    delta3 /= n
    g_w3 = a2.T @ delta3
    g_b3 = delta3.sum(axis=0)

    delta2 = (delta3 @ w3.T) * (pre2 > 0)
    g_w2 = a1.T @ delta2
    g_b2 = delta2.sum(axis=0)

    delta1 = (delta2 @ w2.T) * a1 * (1.0 - a1)
    g_w1 = x.T @ delta1
    g_b1 = delta1.sum(axis=0)
    return (g_w1, g_w2, g_w3), (g_b1, g_b2, g_b3)


def fit_normalization(samples):
    """Robust affine input transform: median shift, IQR-based scale.

    The IQR/1.349 scale matches the standard deviation on Gaussian data but
    stays finite on heavy-tailed outputs, where raw mean/std would collapse
    the working range of the first sigmoid layer.
    """
    samples = np.asarray(samples, dtype=float)
    shift = float(np.median(samples))
    q25, q75 = np.percentile(samples, [25.0, 75.0])
    scale = float(q75 - q25) / 1.349
    if scale <= 0:
        scale = float(samples.std())
    return shift, (scale if scale > 0 else 1.0)


def train(
    params,
    y,
    labels,
    epochs=100,
    lr=1e-3,
    batch_size=128,
    seed=0,
    refit_normalization=True,
):
    """Adam training on cross-entropy; returns the best-epoch parameters.

    The full-set loss is evaluated after every epoch and the weights with the
    lowest loss seen so far are returned, so the best-so-far loss is
    non-increasing across epochs.
    """
    y = np.asarray(y, dtype=float).ravel()
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if y.size == 0 or y.size != labels.size:
        raise InvalidParameterError("need a nonempty, aligned training set")
    if labels.min() < 0 or labels.max() >= params.n_classes:
        raise InvalidParameterError("label outside the class range")

    if refit_normalization:
        shift, scale = fit_normalization(y)
        params = replace(params, input_shift=shift, input_scale=scale)

    weights = [w.copy() for w in params.weights]
    biases = [b.copy() for b in params.biases]
    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    rng = np.random.default_rng(seed)
    current = replace(params, weights=tuple(weights), biases=tuple(biases))
    best = current
    best_loss = cross_entropy(current, y, labels)

    for epoch in range(epochs):
        order = rng.permutation(y.size)
        for start in range(0, y.size, batch_size):
            idx = order[start : start + batch_size]
            g_w, g_b = _gradients(current, y[idx], labels[idx])
            step += 1
            corr1 = 1.0 - beta1**step
            corr2 = 1.0 - beta2**step
            for i in range(3):
                m_w[i] = beta1 * m_w[i] + (1 - beta1) * g_w[i]
                v_w[i] = beta2 * v_w[i] + (1 - beta2) * g_w[i] ** 2
                weights[i] = weights[i] - lr * (m_w[i] / corr1) / (np.sqrt(v_w[i] / corr2) + eps)
                m_b[i] = beta1 * m_b[i] + (1 - beta1) * g_b[i]
                v_b[i] = beta2 * v_b[i] + (1 - beta2) * g_b[i] ** 2
                biases[i] = biases[i] - lr * (m_b[i] / corr1) / (np.sqrt(v_b[i] / corr2) + eps)
            current = replace(current, weights=tuple(w.copy() for w in weights), biases=tuple(b.copy() for b in biases))
        loss = cross_entropy(current, y, labels)
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch)
        if loss < best_loss:
            best_loss = loss
            best = current
    return best


def gradient_check(params, y, label, n_coords=50, step=1e-5, seed=0):
    """Max relative error of analytic vs central-difference gradients."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    labels = np.atleast_1d(np.asarray(label, dtype=np.int64))
    g_w, g_b = _gradients(params, y, labels)
    analytic = np.concatenate([g.ravel() for g in g_w] + [g.ravel() for g in g_b])

    flat = params.flatten()
    rng = np.random.default_rng(seed)
    coords = rng.choice(flat.size, size=min(n_coords, flat.size), replace=False)

    def rebuild(vec):
        ws, bs, pos = [], [], 0
        for w in params.weights:
            ws.append(vec[pos : pos + w.size].reshape(w.shape))
            pos += w.size
        for b in params.biases:
            bs.append(vec[pos : pos + b.size].reshape(b.shape))
            pos += b.size
        return replace(params, weights=tuple(ws), biases=tuple(bs))

    worst = 0.0
    for c in coords:
        plus = flat.copy()
        plus[c] += step
        minus = flat.copy()
        minus[c] -= step
        numeric = (
            cross_entropy(rebuild(plus), y, labels) - cross_entropy(rebuild(minus), y, labels)
        ) / (2 * step)
        denom = max(abs(analytic[c]), abs(numeric), 1e-8)
        worst = max(worst, abs(analytic[c] - numeric) / denom)
    return worst
