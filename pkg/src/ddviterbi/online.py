"""Decision-directed online retraining over coded blocks.

Each block is detected and RS-decoded; when decoding succeeds with a bit
error fraction below the threshold, the decoded bits are re-encoded into a
meta-training sequence used to retrain the classifier and warm-refit the
mixture. Skipped blocks leave the model untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import fec, gmm, mlp
from .detector import LikelihoodModel, detect_block, window_labels
from .errors import InvalidParameterError


@dataclass(frozen=True)
class OnlineConfig:
    """Retraining gate and per-block update hyperparameters."""

    threshold: float = 0.02  # max fraction of bit errors to accept meta-training
    lr: float = 3e-4
    epochs: int = 50
    batch_size: int = 128
    em_max_iters: int = 30
    em_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidParameterError("threshold must be a fraction in [0, 1]")


@dataclass(frozen=True)
class OnlineState:
    """Current model plus bookkeeping counters (immutable; updates copy)."""

    model: LikelihoodModel
    config: OnlineConfig = field(default_factory=OnlineConfig)
    processed: int = 0
    retrained: int = 0
    skipped: int = 0


@dataclass(frozen=True)
class BlockResult:
    block: int
    bits: np.ndarray
    eps: int
    decode_ok: bool
    retrained: bool


def process_block(state, outputs):
    """Detect + decode one block; retrain when the error gate opens.

    Returns (BlockResult, new OnlineState). Decode failure is a normal skip
    path recorded in the counters.
    """
    outputs = np.asarray(outputs, dtype=float)
    cons = state.model.constellation
    detected = detect_block(state.model, outputs)
    bits, eps, ok = fec.decode_block(detected, cons)

    gate = ok and eps / fec.INFO_BITS < state.config.threshold
    if not gate:
        result = BlockResult(state.processed, bits, eps, ok, False)
        new_state = replace(state, processed=state.processed + 1, skipped=state.skipped + 1)
        return result, new_state

    meta_symbols = fec.encode_block(bits, cons).channel_symbols
    labels = window_labels(meta_symbols, cons)
    cfg = state.config
    classifier = mlp.train(
        state.model.classifier,
        outputs,
        labels,
        epochs=cfg.epochs,
        lr=cfg.lr,
        batch_size=cfg.batch_size,
        seed=cfg.seed + state.processed,
        refit_normalization=False,
    )
    mixture = gmm.warm_refit(
        state.model.mixture, outputs, max_iters=cfg.em_max_iters, tol=cfg.em_tol
    )
    model = LikelihoodModel(classifier=classifier, mixture=mixture, constellation=cons)
    result = BlockResult(state.processed, bits, eps, ok, True)
    new_state = replace(
        state, model=model, processed=state.processed + 1, retrained=state.retrained + 1
    )
    return result, new_state


def run_stream(state, blocks, log_path=None):
    """Process blocks sequentially; returns (per-block trace, final state).

    ``blocks`` yields (outputs, true_bits) pairs; true_bits may be None, in
    which case BER is reported as NaN. The optional JSON-lines log gets one
    record per block.
    """
    trace = []
    log_file = open(log_path, "w") if log_path else None
    try:
        for outputs, true_bits in blocks:
            result, state = process_block(state, outputs)
            if true_bits is None:
                ber = float("nan")
            else:
                ber = float(np.mean(result.bits != np.asarray(true_bits)))
            entry = {
                "block": result.block,
                "eps": result.eps,
                "decode_ok": result.decode_ok,
                "retrained": result.retrained,
                "ber": ber,
            }
            trace.append(entry)
            if log_file:
                log_file.write(json.dumps(entry) + "\n")
    finally:
        if log_file:
            log_file.close()
    if not trace:
        raise InvalidParameterError("need at least one block")
    return trace, state
