"""Scenario configs, Monte-Carlo plumbing, CSV output, CLI entry points."""

import math
import pathlib

import numpy as np
import pytest

from ddviterbi import bench, channels as ch, cli, detector as dt, fec
from ddviterbi.errors import InvalidParameterError, InvalidScenarioError

CONFIG_DIR = pathlib.Path(__file__).resolve().parent.parent / "configs"


def _tiny_scenario(**kw):
    base = dict(
        name="tiny", channel="gaussian", memory=2, snr_db=(6.0,),
        detectors=("learned", "viterbi-csi"), symbols_per_point=2000,
        block_length=1000, train_samples=500, gammas=(0.2,),
        csi_error_var=0.0, noisy_training_profiles=3, seed=0, epochs=5, lr=1e-3,
    )
    base.update(kw)
    return bench.Scenario(**base)


def test_load_quick_config():
    scenario = bench.load_config(CONFIG_DIR / "quick.ini")
    assert scenario.name == "quick"
    assert scenario.channel == "gaussian"
    assert scenario.memory == 2
    assert scenario.snr_db == (6.0,)
    assert scenario.detectors == ("learned", "viterbi-csi")


def test_load_config_overrides():
    scenario = bench.load_config(CONFIG_DIR / "quick.ini", {"seed": 9, "symbols_per_point": 50})
    assert scenario.seed == 9
    assert scenario.symbols_per_point == 50


def test_load_config_errors(tmp_path):
    with pytest.raises(InvalidParameterError, match="cannot read"):
        bench.load_config(tmp_path / "missing.ini")

    bad = tmp_path / "bad.ini"
    bad.write_text("[other]\nx = 1\n")
    with pytest.raises(InvalidParameterError, match="scenario"):
        bench.load_config(bad)

    bad.write_text("[scenario]\nname = x\nchannel = gaussian\nmemory = 2\n")
    with pytest.raises(InvalidParameterError, match="snr_db"):
        bench.load_config(bad)

    bad.write_text(
        "[scenario]\nname = x\nchannel = laplacian\nmemory = 2\n"
        "snr_db = 0\ndetectors = viterbi-csi\nsymbols_per_point = 10\n"
    )
    with pytest.raises(InvalidParameterError, match="laplacian"):
        bench.load_config(bad)

    bad.write_text(
        "[scenario]\nname = x\nchannel = gaussian\nmemory = 2\n"
        "snr_db = 0\ndetectors = oracle\nsymbols_per_point = 10\n"
    )
    with pytest.raises(InvalidScenarioError, match="oracle"):
        bench.load_config(bad)


def test_alpha_stable_config_needs_section(tmp_path):
    bad = tmp_path / "stable.ini"
    bad.write_text(
        "[scenario]\nname = x\nchannel = alpha_stable\nmemory = 2\n"
        "snr_db = 10\ndetectors = viterbi-csi\nsymbols_per_point = 10\n"
    )
    with pytest.raises(InvalidParameterError, match="alpha_stable"):
        bench.load_config(bad)


def test_all_shipped_configs_parse():
    for path in sorted(CONFIG_DIR.glob("*.ini")):
        scenario = bench.load_config(path)
        assert scenario.snr_db


def test_db_to_linear():
    assert bench.db_to_linear(0.0) == pytest.approx(1.0)
    assert bench.db_to_linear(10.0) == pytest.approx(10.0)
    assert bench.db_to_linear(-3.0) == pytest.approx(10 ** -0.3)


def test_binomial_ci_contains_rate_and_shrinks():
    lo, hi = bench.binomial_ci(50, 1000)
    assert lo <= 0.05 <= hi
    lo2, hi2 = bench.binomial_ci(200, 4000)
    assert (hi - lo) / (hi2 - lo2) == pytest.approx(2.0, rel=0.05)
    assert bench.binomial_ci(0, 100) == (0.0, 0.0)


def test_generate_training_deterministic():
    profile = ch.ChannelProfile(ch.exp_decay_profile(0.2, 4), 5.0, ch.GAUSSIAN)
    cons = ch.bpsk(4)
    y1, s1 = bench.generate_training(profile, cons, 100, seed=3)
    y2, s2 = bench.generate_training(profile, cons, 100, seed=3)
    assert np.array_equal(y1, y2) and np.array_equal(s1, s2)


def test_composite_train_single_profile_matches_plain_fit():
    profile = ch.ChannelProfile(ch.exp_decay_profile(0.2, 4), 10.0, ch.GAUSSIAN)
    cons = ch.bpsk(4)
    composite = bench.composite_train([profile], cons, 1000, seed=4, epochs=5)
    y, s = bench.generate_training(profile, cons, 1000, bench._subseed(4, 7, 0))
    plain = dt.fit_model(y, s, cons, epochs=5, seed=4)
    for wa, wb in zip(composite.classifier.weights, plain.classifier.weights):
        assert np.array_equal(wa, wb)
    assert np.array_equal(composite.mixture.means, plain.mixture.means)


def test_degenerate_sweep_smoke():
    scenario = _tiny_scenario(symbols_per_point=10, train_samples=100, epochs=2)
    rows = bench.run_sweep(scenario)
    assert len(rows) == 2
    for row in rows:
        assert 0.0 <= row["rate"] <= 1.0
        assert row["ci_low"] <= row["rate"] <= row["ci_high"]
        assert row["trials"] >= 10


def test_sweep_rejects_fading_detectors():
    scenario = _tiny_scenario(detectors=("learned-online",))
    with pytest.raises(InvalidScenarioError):
        bench.run_sweep(scenario)


def test_noisy_csi_requires_error_variance():
    scenario = _tiny_scenario(detectors=("viterbi-noisy-csi",), symbols_per_point=10)
    with pytest.raises(InvalidScenarioError):
        bench.run_sweep(scenario)


def test_make_fading_blocks_shapes():
    scenario = _tiny_scenario(
        memory=4,
        fading_schedule=ch.FadingSchedule(periods=(51, 39, 33, 21), decay=0.2),
    )
    blocks = bench.make_fading_blocks(scenario, 10.0, 3, seed=0)
    assert len(blocks) == 3
    for y, bits, profile in blocks:
        assert y.size == fec.CODE_BITS
        assert bits.size == fec.INFO_BITS
        assert profile.taps.size == 4


def test_fading_requires_schedule():
    scenario = _tiny_scenario(detectors=("viterbi-csi",))
    with pytest.raises(InvalidScenarioError):
        bench.run_fading(scenario)


def test_write_csv_fixed_format(tmp_path):
    rows = [
        {
            "scenario": "x", "detector": "viterbi-csi", "snr_db": 8.0, "trials": 100,
            "errors": 3, "rate": 0.03, "ci_low": 0.0, "ci_high": 0.0634, "seed": 0,
        }
    ]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    bench.write_csv(rows, a)
    bench.write_csv(rows, b)
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == ",".join(bench.CSV_FIELDS)


def test_cli_selftest():
    assert cli.main(["selftest"]) == 0


def test_cli_sweep_quick(tmp_path):
    out = tmp_path / "quick.csv"
    code = cli.main(
        ["sweep", "--config", str(CONFIG_DIR / "quick.ini"), "--out", str(out), "--budget", "2000"]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(bench.CSV_FIELDS)
    assert len(lines) == 3  # header + one row per detector


def test_cli_train_and_detect(tmp_path):
    model_path = tmp_path / "model.npz"
    code = cli.main(
        [
            "train", "--config", str(CONFIG_DIR / "quick.ini"),
            "--snr-db", "6", "--out", str(model_path),
        ]
    )
    assert code == 0 and model_path.exists()

    model = dt.load_model(model_path)
    profile = ch.ChannelProfile(
        ch.exp_decay_profile(0.2, 2), bench.db_to_linear(6.0), ch.GAUSSIAN
    )
    rng = np.random.default_rng(0)
    symbols = np.asarray(model.constellation.points)[rng.integers(0, 2, 500)]
    y = ch.transmit(symbols, profile, seed=1)
    y_path = tmp_path / "y.npy"
    np.save(y_path, y)
    out_path = tmp_path / "detected.npy"
    code = cli.main(
        ["detect", "--model", str(model_path), "--input", str(y_path), "--out", str(out_path)]
    )
    assert code == 0
    detected = np.load(out_path)
    assert detected.size == 500
    assert np.mean(detected != symbols) < 0.1
