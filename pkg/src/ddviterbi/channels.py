"""Finite-memory channel simulation: ISI tap profiles, noise families, fading.

All channels share the same linear intersymbol-interference core
``sqrt(snr) * sum_tau h[tau] * s[i - tau]`` followed by a noise family
(additive Gaussian, Poisson counting, or additive alpha-stable). Outputs for
the first ``memory - 1`` indices use zero-padded pre-block symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import InvalidParameterError, InvalidScenarioError, TabulationError

GAUSSIAN = "gaussian"
POISSON = "poisson"

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Constellation:
    """Real symbol alphabet plus the channel memory defining the state space."""

    points: tuple
    memory: int

    def __post_init__(self):
        points = tuple(float(p) for p in self.points)
        object.__setattr__(self, "points", points)
        if len(points) < 2:
            raise InvalidParameterError("constellation needs at least 2 points")
        if len(set(points)) != len(points):
            raise InvalidParameterError("constellation points must be distinct")
        if self.memory < 1:
            raise InvalidParameterError("memory must be >= 1")
        if len(points) ** self.memory > 2**31:
            raise InvalidParameterError("state space C^m too large to index")

    @property
    def size(self):
        return len(self.points)

    @property
    def n_states(self):
        return self.size**self.memory

    def index_of(self, symbols):
        """Map symbol values to alphabet indices (exact match required)."""
        symbols = np.asarray(symbols, dtype=float)
        lut = {p: i for i, p in enumerate(self.points)}
        try:
            return np.array([lut[float(s)] for s in np.atleast_1d(symbols)], dtype=np.int64)
        except KeyError as exc:
            raise InvalidScenarioError(f"symbol {exc.args[0]} not in constellation") from exc


def bpsk(memory=4):
    return Constellation((-1.0, 1.0), memory)


def ook(memory=4):
    return Constellation((0.0, 1.0), memory)


@dataclass(frozen=True)
class AlphaStable:
    """Alpha-stable noise parameters in the 0-parameterization."""

    alpha: float
    beta: float
    scale: float = 1.0
    loc: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise InvalidParameterError("alpha must be in (0, 2]")
        if not -1.0 <= self.beta <= 1.0:
            raise InvalidParameterError("beta must be in [-1, 1]")
        if self.scale <= 0.0:
            raise InvalidParameterError("scale must be positive")


@dataclass(frozen=True)
class ChannelProfile:
    """ISI tap vector, linear-scale SNR, and noise family."""

    taps: np.ndarray
    snr: float
    noise: object = GAUSSIAN  # GAUSSIAN, POISSON, or an AlphaStable instance

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        object.__setattr__(self, "taps", taps)
        if taps.ndim != 1 or taps.size < 1:
            raise InvalidParameterError("taps must be a nonempty vector")
        if self.snr <= 0.0:
            raise InvalidParameterError("snr must be positive (linear scale)")
        if not (self.noise in (GAUSSIAN, POISSON) or isinstance(self.noise, AlphaStable)):
            raise InvalidScenarioError(f"unknown noise family: {self.noise!r}")

    @property
    def memory(self):
        return self.taps.size


@dataclass(frozen=True)
class FadingSchedule:
    """Per-tap cosine modulation periods for the block-fading profile."""

    periods: tuple
    decay: float = 0.2

    def __post_init__(self):
        periods = tuple(int(p) for p in self.periods)
        object.__setattr__(self, "periods", periods)
        if any(p <= 0 for p in periods):
            raise InvalidParameterError("all fading periods must be positive")
        if self.decay <= 0.0:
            raise InvalidParameterError("decay must be positive")


def exp_decay_profile(gamma, memory):
    """Exponentially decaying taps h[tau] = exp(-gamma * tau), tau = 0..m-1."""
    if gamma <= 0.0:
        raise InvalidParameterError("gamma must be positive")
    if memory < 1:
        raise InvalidParameterError("memory must be >= 1")
    tau = np.arange(memory, dtype=float)
    return np.exp(-gamma * tau)


def block_fading_profile(schedule, block_index):
    """Taps for block j: exponential decay times 0.8 + 0.2*cos(2*pi*j/p[tau])."""
    if block_index < 1:
        raise InvalidParameterError("block index must be >= 1")
    periods = np.asarray(schedule.periods, dtype=float)
    base = exp_decay_profile(schedule.decay, periods.size)
    return base * (0.8 + 0.2 * np.cos(_TWO_PI * block_index / periods))


def perturb_csi(taps, error_var, seed):
    """Corrupt taps with iid zero-mean Gaussian noise of the given variance."""
    if error_var < 0.0:
        raise InvalidParameterError("error variance must be nonnegative")
    taps = np.asarray(taps, dtype=float)
    if error_var == 0.0:
        return taps.copy()
    rng = np.random.default_rng(seed)
    return taps + rng.normal(0.0, math.sqrt(error_var), size=taps.shape)


def isi_mean(symbols, profile):
    """Noise-free channel output sqrt(snr) * (h * s), zero-padded at the start."""
    symbols = np.asarray(symbols, dtype=float)
    full = np.convolve(symbols, profile.taps)[: symbols.size]
    return math.sqrt(profile.snr) * full


def transmit(symbols, profile, seed):
    """Push a symbol block through the channel; deterministic given the seed."""
    symbols = np.asarray(symbols, dtype=float)
    if symbols.size <= profile.memory:
        raise InvalidParameterError("block length must exceed the channel memory")
    rng = np.random.default_rng(seed)
    mean = isi_mean(symbols, profile)
    if profile.noise == GAUSSIAN:
        return mean + rng.standard_normal(symbols.size)
    if profile.noise == POISSON:
        if not np.isin(symbols, (0.0, 1.0)).all():
            raise InvalidScenarioError("Poisson channel requires on-off keying symbols {0,1}")
        lam = mean + 1.0
        if np.any(lam <= 0.0):
            raise InvalidScenarioError("Poisson intensity must stay positive")
        return rng.poisson(lam).astype(float)
    return mean + sample_alpha_stable(profile.noise, symbols.size, rng)


def sample_alpha_stable(params, size, rng):
    """Draw alpha-stable variates by the Chambers-Mallows-Stuck transform."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    alpha, beta, c, mu = params.alpha, params.beta, params.scale, params.loc
    v = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    w = rng.exponential(1.0, size)
    if alpha == 1.0:
        half_pi = math.pi / 2.0
        x = (2.0 / math.pi) * (
            (half_pi + beta * v) * np.tan(v)
            - beta * np.log((half_pi * w * np.cos(v)) / (half_pi + beta * v))
        )
        # shift from the 1- to the 0-parameterization
        return c * x + (2.0 / math.pi) * beta * c * math.log(c) + mu
    shift = beta * math.tan(math.pi * alpha / 2.0)
    b = math.atan(shift) / alpha
    s = (1.0 + shift * shift) ** (1.0 / (2.0 * alpha))
    x = (
        s
        * np.sin(alpha * (v + b))
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * (v + b)) / w) ** ((1.0 - alpha) / alpha)
    )
    return c * (x - shift) + mu


def _stable_cf(t, params):
    """Characteristic function in the 0-parameterization (t > 0)."""
    alpha, beta, c, mu = params.alpha, params.beta, params.scale, params.loc
    ct = c * t
    if alpha == 1.0:
        psi = -ct * (1.0 + 1j * beta * (2.0 / math.pi) * np.log(ct))
    else:
        tan_half = math.tan(math.pi * alpha / 2.0)
        psi = -(ct**alpha) * (1.0 + 1j * beta * tan_half * (ct ** (1.0 - alpha) - 1.0))
    return np.exp(psi + 1j * mu * t)


def alpha_stable_pdf(y, params, abs_tol=1e-8):
    """Density at a single point via inversion of the characteristic function."""

    def integrand(t):
        return (_stable_cf(t, params) * np.exp(-1j * t * y)).real / math.pi

    value, err = integrate.quad(integrand, 0.0, np.inf, epsabs=abs_tol, limit=400)
    if not math.isfinite(value) or err > max(100.0 * abs_tol, 1e-4 * abs(value)):
        raise TabulationError(
            f"stable-pdf quadrature did not converge at y={y} (estimate {value}, error {err})"
        )
    return max(value, 0.0)


@dataclass(frozen=True)
class PdfTable:
    """Density tabulated on an equally spaced grid, with nearest-point lookup."""

    grid: np.ndarray
    pdf: np.ndarray

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    def lookup(self, values):
        """Density at the grid point nearest to each value (no interpolation)."""
        values = np.asarray(values, dtype=float)
        idx = np.rint((values - self.grid[0]) / self.step).astype(np.int64)
        idx = np.clip(idx, 0, self.grid.size - 1)
        return self.pdf[idx]


def alpha_stable_pdf_table(params, grid_min=-5.0, grid_max=5.0, n_points=50):
    """Tabulate the alpha-stable density on an equally spaced grid."""
    if n_points < 2:
        raise InvalidParameterError("need at least 2 grid points")
    if grid_min >= grid_max:
        raise InvalidParameterError("grid_min must be below grid_max")
    grid = np.linspace(grid_min, grid_max, n_points)
    pdf = np.array([alpha_stable_pdf(y, params) for y in grid])
    return PdfTable(grid=grid, pdf=pdf)
