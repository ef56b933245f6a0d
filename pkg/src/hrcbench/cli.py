"""Command-line harness: gen-data | train | run | report.

All state lives in the config file (JSON of ExperimentConfig fields) plus the
CLI flags; environment variables are never consulted. Every output embeds the
config hash, `run` resumes past completed trials, and the whole pipeline is
byte-deterministic given the master seed.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import bench, fileio
from .config import ExperimentConfig
from .core import ConfigurationError, ValidationError
from .evaluation import aggregate, frame_errors, ground_truth_drt, score_trial
from .human_sim import training_pairs
from .linear_model import TrainingConfig, train_linear
from .neural_model import train_network
from .rls import LambdaSchedule
from .robot_sim import run_trial


def load_config(args):
    if args.config:
        config = ExperimentConfig.from_json_file(args.config)
    else:
        config = ExperimentConfig()
    if args.seed is not None:
        config = ExperimentConfig.from_dict(
            {**config.to_dict(), "master_seed": args.seed})
    return config


def cmd_gen_data(args):
    config = load_config(args)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "dataset.csv")
    trajectories = bench.build_training_trajectories(config)
    fileio.write_dataset(trajectories, path, config.config_hash())
    print(f"wrote {len(trajectories)} trajectories to {path}")
    return 0


def cmd_train(args):
    config = load_config(args)
    trajectories, data_hash = fileio.read_dataset(args.data)
    if data_hash and data_hash != config.config_hash():
        raise ConfigurationError(
            f"dataset hash {data_hash} does not match config hash "
            f"{config.config_hash()}")
    windows, targets = training_pairs(trajectories)
    from .core import build_linear_regressor, build_network_input
    phis = np.array([build_linear_regressor(w) for w in windows])
    inputs = np.array([build_network_input(w) for w in windows])
    tc = TrainingConfig(config.learning_rate, config.epochs,
                        config.minibatch_size, config.master_seed)
    linear, linear_trace = train_linear(phis, targets, tc)
    network, network_trace = train_network(inputs, targets, tc,
                                           n_hidden=config.hidden_units)
    models = {"linear": linear, "network": network,
              "schedule": LambdaSchedule(config.lambda1, config.lambda2),
              "gain_scale": config.gain_scale}
    fileio.write_models(models, args.out, config.config_hash())
    trace_path = os.path.join(args.out, "training_loss.csv")
    lines = ["# hrcbench-training-trace v1",
             f"# config_hash: {config.config_hash()}",
             "epoch,linear_loss,network_loss"]
    for i, (ll, nl) in enumerate(zip(linear_trace, network_trace)):
        lines.append(f"{i},{fileio.fmt(ll)},{fileio.fmt(nl)}")
    fileio.atomic_write(trace_path, "\n".join(lines) + "\n")
    print(f"wrote model files and loss traces to {args.out}")
    return 0


def _run_cell(payload):
    config_dict, models_dir, label, trial_index, predictor, out_path = payload
    config = ExperimentConfig.from_dict(config_dict)
    models = None
    if predictor != "none":
        models = _MODEL_CACHE.get(models_dir)
        if models is None:
            models = fileio.read_models(models_dir)
            _MODEL_CACHE[models_dir] = models
    pattern = next(p for p in config.patterns() if p.label == label)
    tc = config.make_trial_config(pattern, predictor, trial_index)
    log = run_trial(tc, models)
    fileio.write_trial_log(log, label, trial_index, out_path,
                           config.config_hash())
    return out_path


_MODEL_CACHE = {}


def cmd_run(args):
    config = load_config(args)
    os.makedirs(args.out, exist_ok=True)
    if any(m != "none" for m in config.models):
        fileio.read_models(args.models)  # fail early if missing
    jobs = []
    skipped = 0
    for pattern, trial_index, predictor in bench.trial_grid(config):
        name = fileio.trial_log_name(pattern.label, trial_index, predictor)
        out_path = os.path.join(args.out, name)
        if os.path.exists(out_path):
            skipped += 1
            continue
        jobs.append((config.to_dict(), args.models, pattern.label,
                     trial_index, predictor, out_path))
    if args.workers > 1 and jobs:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            list(pool.map(_run_cell, jobs))
    else:
        for job in jobs:
            _run_cell(job)
    print(f"ran {len(jobs)} trials ({skipped} already present) into {args.out}")
    return 0


def cmd_report(args):
    names = sorted(f for f in os.listdir(args.logs) if f.endswith(".csv"))
    if not names:
        raise ConfigurationError(f"no trial logs found in {args.logs}")
    logs = []
    hashes = set()
    for name in names:
        log, grid = fileio.read_trial_log(os.path.join(args.logs, name))
        hashes.add(grid["config_hash"])
        logs.append((log, grid))
    if len(hashes) != 1:
        raise ConfigurationError(
            f"refusing to aggregate logs with mismatched config hashes: {sorted(hashes)}")
    config_hash = hashes.pop()

    d_rt = ground_truth_drt(logs[0][0].config)
    trial_scores = []
    curves = []
    for log, grid in logs:
        row = {"model": grid["predictor"], "pattern_label": grid["pattern_label"],
               "trial": grid["trial_index"]}
        row.update(score_trial(log, d_rt))
        trial_scores.append(row)
        fe = frame_errors(log)
        valid = fe[~np.isnan(fe)]
        curves.append({
            "model": grid["predictor"], "pattern_label": grid["pattern_label"],
            "trial": grid["trial_index"],
            "mean_error": float(np.mean(valid)) if len(valid) else None,
            "std_error": float(np.std(valid)) if len(valid) else None,
        })
    trial_scores.sort(key=lambda r: (r["model"], r["pattern_label"], r["trial"]))
    curves.sort(key=lambda r: (r["model"], r["pattern_label"], r["trial"]))
    tables = aggregate(trial_scores)
    fileio.write_reports(tables, trial_scores, curves, args.out, config_hash)
    print(f"wrote report files to {args.out}")
    return 0


ERROR_CATEGORIES = [
    (ValidationError, "validation", 2),
    (ConfigurationError, "configuration", 3),
    (OSError, "io", 4),
]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hrcbench",
        description="Closed-loop human-motion-prediction benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults used if omitted)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("gen-data", help="generate the training dataset CSV")
    common(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="pre-train the four prediction models")
    common(p)
    p.add_argument("--data", required=True, help="dataset CSV from gen-data")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="execute the closed-loop trial grid")
    common(p)
    p.add_argument("--models", required=True, help="model directory from train")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="aggregate trial logs into report CSVs")
    common(p)
    p.add_argument("--logs", required=True, help="trial log directory from run")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - map to exit categories
        for exc_type, category, code in ERROR_CATEGORIES:
            if isinstance(exc, exc_type):
                print(f"error category={category}: {exc}", file=sys.stderr)
                return code
        print(f"error category=internal: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
