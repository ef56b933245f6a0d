"""End-to-end benchmark orchestration: dataset -> pre-training -> trial grid
-> per-trial scores. The CLI wraps these with file I/O; tests drive them
in-memory.
"""

import numpy as np

from .config import ExperimentConfig
from .core import build_linear_regressor, build_network_input
from .evaluation import ground_truth_drt, score_trial
from .human_sim import generate_dataset, training_pairs
from .linear_model import TrainingConfig, train_linear
from .neural_model import train_network
from .rls import LambdaSchedule
from .robot_sim import run_trial


def build_training_trajectories(config: ExperimentConfig):
    return generate_dataset(config.patterns(), config.trajectories_per_pattern,
                            config.master_seed)


def train_models(config: ExperimentConfig, trajectories=None):
    """Pre-train the fixed models; the adaptive variants are initialized from
    them at trial time. Returns the models dict consumed by make_predictor.
    """
    if trajectories is None:
        trajectories = build_training_trajectories(config)
    windows, targets = training_pairs(trajectories)
    phis = np.array([build_linear_regressor(w) for w in windows])
    inputs = np.array([build_network_input(w) for w in windows])

    tc = TrainingConfig(config.learning_rate, config.epochs,
                        config.minibatch_size, config.master_seed)
    linear, linear_trace = train_linear(phis, targets, tc)
    network, network_trace = train_network(inputs, targets, tc,
                                           n_hidden=config.hidden_units)
    return {
        "linear": linear,
        "network": network,
        "schedule": LambdaSchedule(config.lambda1, config.lambda2),
        "gain_scale": config.gain_scale,
        "traces": {"linear": linear_trace, "network": network_trace},
    }


def trial_grid(config: ExperimentConfig, predictors=None, patterns=None):
    """All (pattern, trial_index, predictor) cells of the benchmark, in a
    deterministic order.
    """
    predictors = list(predictors if predictors is not None else config.models)
    patterns = list(patterns if patterns is not None else config.patterns())
    for pattern in patterns:
        for trial_index in range(config.trials_per_pattern_per_model):
            for predictor in predictors:
                yield pattern, trial_index, predictor


def run_benchmark(config: ExperimentConfig, models, predictors=None,
                  patterns=None):
    """Run the full grid; yields (pattern_label, trial_index, predictor, log)."""
    for pattern, trial_index, predictor in trial_grid(config, predictors, patterns):
        tc = config.make_trial_config(pattern, predictor, trial_index)
        yield pattern.label, trial_index, predictor, run_trial(tc, models)


def score_benchmark(config: ExperimentConfig, results):
    """Score (label, trial, predictor, log) tuples; D_RT is computed once since
    the robot-side geometry is identical across trials.
    """
    results = list(results)
    if not results:
        return []
    d_rt = ground_truth_drt(results[0][3].config)
    scores = []
    for label, trial_index, predictor, log in results:
        row = {"model": predictor, "pattern_label": label, "trial": trial_index}
        row.update(score_trial(log, d_rt))
        scores.append(row)
    return scores
