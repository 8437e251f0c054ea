"""Viterbi dynamic program over the C^m state space, plus an exhaustive oracle.

States are length-m symbol windows encoded as integers with the oldest symbol
in the most significant digit: state = sum_t idx(s_t) * C^(m-1-t). A state at
step k covers positions k-m+1..k; its predecessors share the m-1 newest
symbols of the previous step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NoValidPathError

_BRUTE_FORCE_LIMIT = 2**20


@dataclass(frozen=True)
class TrellisSpec:
    """State-space geometry for a C-ary alphabet with memory m."""

    alphabet_size: int
    memory: int

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise InvalidParameterError("alphabet size must be >= 2")
        if self.memory < 1:
            raise InvalidParameterError("memory must be >= 1")

    @property
    def n_states(self):
        return self.alphabet_size**self.memory

    def state_symbols(self, state):
        """Decode a state index into its window of symbol indices, oldest first."""
        c, m = self.alphabet_size, self.memory
        out = np.empty(m, dtype=np.int64)
        for t in range(m - 1, -1, -1):
            out[t] = state % c
            state //= c
        return out

    def state_windows(self):
        """(n_states, m) array of all state windows, row i = state_symbols(i)."""
        c, m = self.alphabet_size, self.memory
        idx = np.arange(self.n_states)
        cols = [(idx // c ** (m - 1 - t)) % c for t in range(m)]
        return np.stack(cols, axis=1)


@dataclass
class TrellisRun:
    """Recorded dynamic-programming pass: costs, survivors, decisions."""

    path_costs: np.ndarray  # (T, n_states) accumulated costs
    survivors: np.ndarray  # (T, n_states) predecessor branch in [0, C)
    stream_decisions: np.ndarray  # zero-delay per-step emissions (length T)
    decisions: np.ndarray  # traceback output (length T)


def _run(step_costs, length, spec, on_decision=None, record_costs=False):
    c, m = spec.alphabet_size, spec.memory
    n_states = spec.n_states
    group = n_states // c  # states sharing the same m-1 newest predecessor symbols

    costs = np.zeros(n_states)
    survivors = np.empty((length, n_states), dtype=np.uint8)
    stream = np.empty(length, dtype=np.int64)
    recorded = np.empty((length, n_states)) if record_costs else None
    offset = 0.0

    for k in range(length):
        step = np.asarray(step_costs(k), dtype=float)
        if step.shape != (n_states,):
            raise InvalidParameterError(
                f"cost provider must return {n_states} values per step"
            )
        # predecessor u of state s satisfies u % group == s // c
        prev = costs.reshape(c, group)
        branch = np.argmin(prev, axis=0)
        best_prev = prev[branch, np.arange(group)]
        costs = best_prev[np.arange(n_states) // c] + step
        survivors[k] = branch[np.arange(n_states) // c]
        low = costs.min()
        if not np.isfinite(low):
            raise NoValidPathError(f"all states infeasible at step {k}")
        # per-step normalization keeps costs bounded; argmin-invariant
        costs -= low
        offset += low
        if recorded is not None:
            recorded[k] = costs + offset
        best_state = int(np.argmin(costs))
        if k >= m - 1:
            pos = k - m + 1
            sym = best_state // c ** (m - 1)  # oldest symbol of the best state
            stream[pos] = sym
            if on_decision is not None:
                on_decision(pos, sym)

    # flush: the last m positions come from the terminal best state
    term = int(np.argmin(costs))
    tail = spec.state_symbols(term)
    for t in range(m):
        pos = length - m + t
        if pos >= 0:
            stream[pos] = tail[t]

    # exact maximum-likelihood output via survivor traceback
    decisions = np.empty(length, dtype=np.int64)
    state = term
    for k in range(length - 1, -1, -1):
        decisions[k] = state % c
        state = int(survivors[k, state]) * group + state // c
    return TrellisRun(
        path_costs=recorded,
        survivors=survivors,
        stream_decisions=stream,
        decisions=decisions,
    )


def run_trellis(step_costs, length, spec, on_decision=None, record_costs=False):
    """Full dynamic-programming pass returning the recorded TrellisRun."""
    if length <= spec.memory:
        raise InvalidParameterError("block length must exceed the memory")
    return _run(step_costs, length, spec, on_decision, record_costs)


def viterbi_detect(step_costs, length, spec, on_decision=None):
    """Exact minimizer of the summed per-step state costs.

    ``step_costs(k)`` must return the cost of every state at step k
    (infinities forbid states). Zero-delay decisions are surfaced through
    ``on_decision(position, symbol)`` as each step completes; the returned
    sequence is the global argmin recovered by traceback. Ties break toward
    the lowest state index.
    """
    return run_trellis(step_costs, length, spec, on_decision=on_decision).decisions


def brute_force_ml(step_costs, length, spec):
    """Exhaustive minimization oracle; ties break lexicographically.

    Matches viterbi_detect's convention of free (unconstrained) pre-block
    symbols: the m-1 virtual symbols before the block are minimized over.
    """
    c, m = spec.alphabet_size, spec.memory
    if c**length > _BRUTE_FORCE_LIMIT:
        raise InvalidParameterError(
            f"instance too large to enumerate: C^T = {c}**{length} exceeds {_BRUTE_FORCE_LIMIT}"
        )
    n_prefix = m - 1
    step_matrix = np.stack(
        [np.asarray(step_costs(k), dtype=float) for k in range(length)]
    )

    # rows ordered so the emitted sequence varies slowest and lexicographically;
    # the first argmin occurrence is then the lexicographic tie-break winner
    n_emit = c**length
    n_pre = c**n_prefix
    emit_idx = np.repeat(np.arange(n_emit), n_pre)
    pre_idx = np.tile(np.arange(n_pre), n_emit)
    full = np.empty((n_emit * n_pre, n_prefix + length), dtype=np.int64)
    for t in range(n_prefix):
        full[:, t] = (pre_idx // c ** (n_prefix - 1 - t)) % c
    for t in range(length):
        full[:, n_prefix + t] = (emit_idx // c ** (length - 1 - t)) % c

    weights = c ** np.arange(m - 1, -1, -1)
    totals = np.zeros(full.shape[0])
    for k in range(length):
        states = full[:, k : k + m] @ weights
        totals += step_matrix[k, states]
    per_emit = totals.reshape(n_emit, n_pre).min(axis=1)
    best = int(np.argmin(per_emit))
    if not np.isfinite(per_emit[best]):
        raise NoValidPathError("no finite-cost sequence exists")
    return np.array(
        [(best // c ** (length - 1 - t)) % c for t in range(length)], dtype=np.int64
    )
