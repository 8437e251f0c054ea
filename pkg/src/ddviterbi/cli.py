"""Command-line harness: train models, detect blocks, run sweeps and fading
studies, and self-test the numerical core."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench, channels as ch, detector as dt
from .errors import InvalidParameterError


def _add_config_arg(sub):
    sub.add_argument("--config", required=True, help="scenario INI file")
    sub.add_argument("--seed", type=int, default=None, help="override scenario seed")


def cmd_train(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    scenario = bench.load_config(args.config, overrides)
    cons = scenario.constellation()
    rho = bench.db_to_linear(args.snr_db)
    gamma = args.gamma if args.gamma is not None else scenario.gammas[0]
    profile = ch.ChannelProfile(
        ch.exp_decay_profile(gamma, scenario.memory), rho, scenario.noise()
    )
    y, s = bench.generate_training(profile, cons, scenario.train_samples, scenario.seed)
    model = dt.fit_model(y, s, cons, epochs=scenario.epochs, lr=scenario.lr, seed=scenario.seed)
    dt.save_model(args.out, model)
    print(f"trained model on {scenario.train_samples} samples -> {args.out}")


def cmd_detect(args):
    model = dt.load_model(args.model)
    outputs = np.load(args.input)
    detected = dt.detect_block(model, outputs)
    np.save(args.out, detected)
    print(f"detected {detected.size} symbols -> {args.out}")


def cmd_sweep(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.budget is not None:
        overrides["symbols_per_point"] = args.budget
    scenario = bench.load_config(args.config, overrides)
    rows = bench.run_sweep(scenario)
    bench.write_csv(rows, args.out)
    for row in rows:
        print(f"{row['detector']:24s} {row['snr_db']:>6.1f} dB  SER={row['rate']:.3e}")
    print(f"wrote {len(rows)} rows -> {args.out}")


def cmd_fading(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.blocks is not None:
        overrides["fading_blocks"] = args.blocks
    scenario = bench.load_config(args.config, overrides)
    rows = bench.run_fading(scenario, log_dir=args.log_dir)
    bench.write_csv(rows, args.out)
    for row in rows:
        print(f"{row['detector']:24s} {row['snr_db']:>6.1f} dB  BER={row['rate']:.3e}")
    print(f"wrote {len(rows)} rows -> {args.out}")


def cmd_selftest(args):
    from . import fec, gmm, mlp, trellis

    rng = np.random.default_rng(0)
    checks = []

    spec = trellis.TrellisSpec(2, 3)
    ok = True
    for _ in range(20):
        costs = rng.normal(size=(9, spec.n_states))
        ok &= np.array_equal(
            trellis.viterbi_detect(lambda k: costs[k], 9, spec),
            trellis.brute_force_ml(lambda k: costs[k], 9, spec),
        )
    checks.append(("trellis vs exhaustive oracle", ok))

    params = mlp.init(8, seed=1)
    err = mlp.gradient_check(params, rng.normal(size=5), rng.integers(0, 8, 5))
    checks.append(("classifier gradient check < 1e-4", err < 1e-4))

    fit = gmm.em_fit(rng.normal(2.0, 1.5, 2000), 2, seed=0)
    checks.append(("mixture weights on simplex", abs(fit.weights.sum() - 1) < 1e-9))

    bits = rng.integers(0, 2, fec.INFO_BITS)
    cw = fec.rs_encode(bits)
    bad = cw.copy()
    for p in rng.choice(fec.N, 10, replace=False):
        bad[p] ^= int(rng.integers(1, 256))
    decoded, _, ok = fec.rs_decode(bad)
    checks.append(("RS corrects 10 symbol errors", ok and np.array_equal(decoded, bits)))

    failed = [name for name, ok in checks if not ok]
    for name, ok in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return 1 if failed else 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="ddviterbi", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_train = subs.add_parser("train", help="train a likelihood model at one SNR point")
    _add_config_arg(p_train)
    p_train.add_argument("--snr-db", type=float, required=True)
    p_train.add_argument("--gamma", type=float, default=None, help="decay of the tap profile")
    p_train.add_argument("--out", required=True, help="output model file (.npz)")
    p_train.set_defaults(func=cmd_train)

    p_detect = subs.add_parser("detect", help="detect a block with a saved model")
    p_detect.add_argument("--model", required=True)
    p_detect.add_argument("--input", required=True, help=".npy file of channel outputs")
    p_detect.add_argument("--out", required=True, help=".npy file for detected symbols")
    p_detect.set_defaults(func=cmd_detect)

    p_sweep = subs.add_parser("sweep", help="SER sweep over the scenario SNR grid")
    _add_config_arg(p_sweep)
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--budget", type=int, default=None, help="override symbols per SNR point")
    p_sweep.set_defaults(func=cmd_sweep)

    p_fading = subs.add_parser("fading", help="coded BER study over the block-fading schedule")
    _add_config_arg(p_fading)
    p_fading.add_argument("--out", required=True, help="output CSV path")
    p_fading.add_argument("--blocks", type=int, default=None, help="override block count")
    p_fading.add_argument("--log-dir", default=None, help="directory for per-block JSONL logs")
    p_fading.set_defaults(func=cmd_fading)

    p_self = subs.add_parser("selftest", help="fast internal consistency checks")
    p_self.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
