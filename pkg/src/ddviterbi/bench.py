"""Experiment harness: scenario configs, Monte-Carlo sweeps, fading studies.

Configs are INI files (key/value with sections, see configs/ for the schema
by example). SNR is given in dB at this boundary and converted to linear
scale before touching the channel layer. All randomness derives from the
scenario seed, so identical config + seed reproduces byte-identical CSV.
"""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import channels as ch
from . import detector as dt
from . import fec, online
from .errors import InvalidParameterError, InvalidScenarioError

SWEEP_DETECTORS = ("learned", "viterbi-csi", "viterbi-noisy-csi", "learned-composite")
FADING_DETECTORS = ("learned-online", "learned-initial", "learned-composite", "viterbi-csi")

CSV_FIELDS = ("scenario", "detector", "snr_db", "trials", "errors", "rate", "ci_low", "ci_high", "seed")


@dataclass(frozen=True)
class Scenario:
    """Fully parsed experiment description."""

    name: str
    channel: str  # gaussian | poisson | alpha_stable
    memory: int
    snr_db: tuple
    detectors: tuple
    symbols_per_point: int
    block_length: int
    train_samples: int
    gammas: tuple
    csi_error_var: float
    noisy_training_profiles: int
    seed: int
    epochs: int
    lr: float
    stable: ch.AlphaStable | None = None
    stable_grid: tuple = (-5.0, 5.0, 50)
    fading_schedule: ch.FadingSchedule | None = None
    fading_blocks: int = 20
    online_config: online.OnlineConfig = field(default_factory=online.OnlineConfig)
    composite_profiles: int = 10
    composite_stride: int = 3

    def constellation(self):
        if self.channel == "poisson":
            return ch.ook(self.memory)
        return ch.bpsk(self.memory)

    def noise(self):
        if self.channel == "gaussian":
            return ch.GAUSSIAN
        if self.channel == "poisson":
            return ch.POISSON
        if self.channel == "alpha_stable":
            return self.stable
        raise InvalidScenarioError(f"unknown channel family: {self.channel}")


def _parse_floats(text):
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _parse_ints(text):
    return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())


def load_config(path, overrides=None):
    """Parse and validate a scenario INI file; raises with section/key context."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise InvalidParameterError(f"cannot read config file: {path}")
    if "scenario" not in parser:
        raise InvalidParameterError(f"{path}: missing [scenario] section")
    sc = parser["scenario"]

    def require(key, cast):
        if key not in sc:
            raise InvalidParameterError(f"{path}: [scenario] missing key '{key}'")
        try:
            return cast(sc[key])
        except ValueError as exc:
            raise InvalidParameterError(f"{path}: [scenario] bad value for '{key}': {exc}") from exc

    channel = require("channel", str).strip()
    if channel not in ("gaussian", "poisson", "alpha_stable"):
        raise InvalidParameterError(f"{path}: unknown channel '{channel}'")

    stable = None
    stable_grid = (-5.0, 5.0, 50)
    if channel == "alpha_stable":
        if "alpha_stable" not in parser:
            raise InvalidParameterError(f"{path}: alpha_stable channel needs [alpha_stable]")
        asec = parser["alpha_stable"]
        stable = ch.AlphaStable(
            alpha=asec.getfloat("alpha"),
            beta=asec.getfloat("beta"),
            scale=asec.getfloat("scale", 1.0),
            loc=asec.getfloat("loc", 0.0),
        )
        stable_grid = (
            asec.getfloat("grid_min", -5.0),
            asec.getfloat("grid_max", 5.0),
            asec.getint("grid_points", 50),
        )

    fading_schedule = None
    fading_blocks = 20
    online_cfg = online.OnlineConfig()
    composite_profiles = 10
    composite_stride = 3
    if "fading" in parser:
        fsec = parser["fading"]
        fading_schedule = ch.FadingSchedule(
            periods=_parse_ints(fsec.get("periods", "51, 39, 33, 21")),
            decay=fsec.getfloat("decay", 0.2),
        )
        fading_blocks = fsec.getint("blocks", 20)
        online_cfg = online.OnlineConfig(
            threshold=fsec.getfloat("threshold", 0.02),
            lr=fsec.getfloat("online_lr", 3e-4),
            epochs=fsec.getint("online_epochs", 50),
        )
        composite_profiles = fsec.getint("composite_profiles", 10)
        composite_stride = fsec.getint("composite_stride", 3)

    scenario = Scenario(
        name=require("name", str).strip(),
        channel=channel,
        memory=require("memory", int),
        snr_db=_parse_floats(require("snr_db", str)),
        detectors=tuple(d.strip() for d in require("detectors", str).split(",") if d.strip()),
        symbols_per_point=require("symbols_per_point", int),
        block_length=sc.getint("block_length", 10000),
        train_samples=sc.getint("train_samples", 5000),
        gammas=_parse_floats(sc.get("gammas", "0.2")),
        csi_error_var=sc.getfloat("csi_error_var", 0.0),
        noisy_training_profiles=sc.getint("noisy_training_profiles", 5),
        seed=sc.getint("seed", 0),
        epochs=sc.getint("epochs", 100),
        lr=sc.getfloat("lr", 1e-3),
        stable=stable,
        stable_grid=stable_grid,
        fading_schedule=fading_schedule,
        fading_blocks=fading_blocks,
        online_config=online_cfg,
        composite_profiles=composite_profiles,
        composite_stride=composite_stride,
    )
    if overrides:
        scenario = replace(scenario, **overrides)
    if not scenario.snr_db:
        raise InvalidParameterError(f"{path}: empty SNR grid")
    if scenario.symbols_per_point <= 0:
        raise InvalidParameterError(f"{path}: symbols_per_point must be positive")
    known = set(SWEEP_DETECTORS) | set(FADING_DETECTORS)
    for det in scenario.detectors:
        if det not in known:
            raise InvalidScenarioError(f"{path}: unknown detector '{det}'")
    return scenario


def db_to_linear(snr_db):
    return 10.0 ** (snr_db / 10.0)


def _subseed(*parts):
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0])


def binomial_ci(errors, trials):
    """Normal-approximation 95% interval around the empirical rate."""
    rate = errors / trials
    half = 1.96 * math.sqrt(max(rate * (1.0 - rate), 0.0) / trials)
    return max(rate - half, 0.0), min(rate + half, 1.0)


def generate_training(profile, constellation, n_samples, seed):
    """Random symbol stream through the channel: (outputs, symbols)."""
    rng = np.random.default_rng(seed)
    symbols = np.asarray(constellation.points)[rng.integers(0, constellation.size, n_samples)]
    outputs = ch.transmit(symbols, profile, seed=_subseed(seed, 1))
    return outputs, symbols


def composite_train(profiles, constellation, n_samples, seed, epochs=100, lr=1e-3):
    """Pool equal training shares from each profile and fit a single model."""
    profiles = list(profiles)
    if not profiles:
        raise InvalidParameterError("need at least one training profile")
    share = n_samples // len(profiles)
    ys, ss = [], []
    for i, profile in enumerate(profiles):
        y, s = generate_training(profile, constellation, share, _subseed(seed, 7, i))
        ys.append(y)
        ss.append(s)
    return dt.fit_model(
        np.concatenate(ys), np.concatenate(ss), constellation, epochs=epochs, lr=lr, seed=seed
    )


def _stable_table(scenario):
    lo, hi, n = scenario.stable_grid
    return ch.alpha_stable_pdf_table(scenario.stable, lo, hi, int(n))


def _sweep_cell(scenario, detector_name, gamma, gamma_idx, snr_db, table):
    """Symbol errors for one (detector, profile, SNR) cell."""
    cons = scenario.constellation()
    rho = db_to_linear(snr_db)
    taps = ch.exp_decay_profile(gamma, scenario.memory)
    profile = ch.ChannelProfile(taps, rho, scenario.noise())
    seed = _subseed(scenario.seed, gamma_idx, round(snr_db * 100))

    if detector_name == "learned":
        if scenario.csi_error_var > 0:
            # trained on a variety of perturbed-tap realizations
            train_profiles = [
                ch.ChannelProfile(
                    ch.perturb_csi(taps, scenario.csi_error_var, _subseed(seed, 11, r)),
                    rho,
                    scenario.noise(),
                )
                for r in range(scenario.noisy_training_profiles)
            ]
            model = composite_train(
                train_profiles, cons, scenario.train_samples, seed,
                epochs=scenario.epochs, lr=scenario.lr,
            )
        else:
            y_tr, s_tr = generate_training(profile, cons, scenario.train_samples, _subseed(seed, 3))
            model = dt.fit_model(y_tr, s_tr, cons, epochs=scenario.epochs, lr=scenario.lr, seed=seed)
        detect = lambda y: dt.detect_block(model, y)
    elif detector_name == "viterbi-csi":
        if scenario.channel == "alpha_stable":
            detect = lambda y: dt.detect_block_model_based(profile, cons, y, stable_table=table)
        else:
            detect = lambda y: dt.detect_block_model_based(profile, cons, y)
    elif detector_name == "viterbi-noisy-csi":
        if scenario.csi_error_var <= 0:
            raise InvalidScenarioError("viterbi-noisy-csi needs csi_error_var > 0")
        noisy = ch.ChannelProfile(
            ch.perturb_csi(taps, scenario.csi_error_var, _subseed(seed, 13)), rho, scenario.noise()
        )
        if scenario.channel == "alpha_stable":
            detect = lambda y: dt.detect_block_model_based(noisy, cons, y, stable_table=table)
        else:
            detect = lambda y: dt.detect_block_model_based(noisy, cons, y)
    else:
        raise InvalidScenarioError(f"detector '{detector_name}' is not a sweep detector")

    per_profile = scenario.symbols_per_point // len(scenario.gammas)
    rng = np.random.default_rng(_subseed(seed, 5))
    errors = trials = 0
    remaining = per_profile
    while remaining > 0:
        block = min(scenario.block_length, max(remaining, scenario.memory + 1))
        symbols = np.asarray(cons.points)[rng.integers(0, cons.size, block)]
        outputs = ch.transmit(symbols, profile, seed=_subseed(seed, 17, remaining))
        detected = detect(outputs)
        errors += int(np.sum(detected != symbols))
        trials += block
        remaining -= block
    return errors, trials


def run_sweep(scenario):
    """SER sweep over the SNR grid; returns CSV-ready row dicts."""
    table = _stable_table(scenario) if scenario.channel == "alpha_stable" else None
    rows = []
    for detector_name in scenario.detectors:
        if detector_name not in SWEEP_DETECTORS:
            raise InvalidScenarioError(f"detector '{detector_name}' is not valid for sweeps")
        for snr_db in scenario.snr_db:
            errors = trials = 0
            for gamma_idx, gamma in enumerate(scenario.gammas):
                e, t = _sweep_cell(scenario, detector_name, gamma, gamma_idx, snr_db, table)
                errors += e
                trials += t
            lo, hi = binomial_ci(errors, trials)
            rows.append(
                {
                    "scenario": scenario.name,
                    "detector": detector_name,
                    "snr_db": snr_db,
                    "trials": trials,
                    "errors": errors,
                    "rate": errors / trials,
                    "ci_low": lo,
                    "ci_high": hi,
                    "seed": scenario.seed,
                }
            )
    return sorted(rows, key=lambda r: (r["detector"], r["snr_db"]))


def _fading_profile(scenario, block_index, rho):
    taps = ch.block_fading_profile(scenario.fading_schedule, block_index)
    return ch.ChannelProfile(taps, rho, scenario.noise())


def make_fading_blocks(scenario, snr_db, n_blocks, seed):
    """Coded blocks over the fading schedule: (outputs, true_bits, profile)."""
    cons = scenario.constellation()
    rho = db_to_linear(snr_db)
    rng = np.random.default_rng(_subseed(seed, 23))
    blocks = []
    for j in range(1, n_blocks + 1):
        profile = _fading_profile(scenario, j, rho)
        info_bits = rng.integers(0, 2, fec.INFO_BITS)
        coded = fec.encode_block(info_bits, cons)
        outputs = ch.transmit(coded.channel_symbols, profile, seed=_subseed(seed, 29, j))
        blocks.append((outputs, info_bits, profile))
    return blocks


def run_fading(scenario, log_dir=None):
    """Coded BER over the block-fading schedule for each detector and SNR."""
    if scenario.fading_schedule is None:
        raise InvalidScenarioError("fading run needs a [fading] section")
    cons = scenario.constellation()
    rows = []
    for snr_db in scenario.snr_db:
        rho = db_to_linear(snr_db)
        seed = _subseed(scenario.seed, 31, round(snr_db * 100))
        blocks = make_fading_blocks(scenario, snr_db, scenario.fading_blocks, seed)

        initial_model = None
        if {"learned-online", "learned-initial"} & set(scenario.detectors):
            initial_profile = _fading_profile(scenario, 1, rho)
            y_tr, s_tr = generate_training(initial_profile, cons, scenario.train_samples, _subseed(seed, 37))
            initial_model = dt.fit_model(
                y_tr, s_tr, cons, epochs=scenario.epochs, lr=scenario.lr, seed=scenario.seed
            )

        for detector_name in scenario.detectors:
            if detector_name not in FADING_DETECTORS:
                raise InvalidScenarioError(f"detector '{detector_name}' is not valid for fading runs")
            bit_errors = 0
            total_bits = scenario.fading_blocks * fec.INFO_BITS
            if detector_name == "learned-online":
                state = online.OnlineState(model=initial_model, config=scenario.online_config)
                log_path = None
                if log_dir is not None:
                    log_path = f"{log_dir}/{scenario.name}_online_{snr_db:g}dB.jsonl"
                trace, _ = online.run_stream(
                    state, ((y, b) for y, b, _ in blocks), log_path=log_path
                )
                bit_errors = int(round(sum(e["ber"] for e in trace) * fec.INFO_BITS))
            elif detector_name == "learned-initial":
                for y, bits, _ in blocks:
                    decoded, _, _ = fec.decode_block(dt.detect_block(initial_model, y), cons)
                    bit_errors += int(np.sum(decoded != bits))
            elif detector_name == "learned-composite":
                profiles = [
                    _fading_profile(scenario, scenario.composite_stride * (k + 1), rho)
                    for k in range(scenario.composite_profiles)
                ]
                model = composite_train(
                    profiles, cons, scenario.train_samples, _subseed(seed, 41),
                    epochs=scenario.epochs, lr=scenario.lr,
                )
                for y, bits, _ in blocks:
                    decoded, _, _ = fec.decode_block(dt.detect_block(model, y), cons)
                    bit_errors += int(np.sum(decoded != bits))
            else:  # viterbi-csi with instantaneous per-block taps
                for y, bits, profile in blocks:
                    detected = dt.detect_block_model_based(profile, cons, y)
                    decoded, _, _ = fec.decode_block(detected, cons)
                    bit_errors += int(np.sum(decoded != bits))
            lo, hi = binomial_ci(bit_errors, total_bits)
            rows.append(
                {
                    "scenario": scenario.name,
                    "detector": detector_name,
                    "snr_db": snr_db,
                    "trials": total_bits,
                    "errors": bit_errors,
                    "rate": bit_errors / total_bits,
                    "ci_low": lo,
                    "ci_high": hi,
                    "seed": scenario.seed,
                }
            )
    return sorted(rows, key=lambda r: (r["detector"], r["snr_db"]))


def write_csv(rows, path):
    """Deterministic CSV output (sorted rows, fixed float formatting)."""
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            formatted = dict(row)
            for key in ("rate", "ci_low", "ci_high"):
                formatted[key] = f"{row[key]:.12g}"
            formatted["snr_db"] = f"{row['snr_db']:g}"
            writer.writerow(formatted)
