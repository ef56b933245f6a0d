"""Trial scoring: prediction error, safety index, efficiency index, and
aggregation into per-model tables.
"""

from dataclasses import dataclass, replace

import numpy as np

from .core import ConfigurationError, M_FUTURE
from .robot_sim import TrialLog, run_trial


def prediction_error(log: TrialLog):
    """Mean Euclidean distance between each predicted horizon step and the
    position realized at that step (smoothed, like the training targets).
    Horizon steps past the trial end are truncated. Returns None when the log
    holds no predictions (baseline trials).
    """
    n = log.n_frames
    errors = []
    for k in range(n):
        if np.any(np.isnan(log.predictions[k])):
            continue
        pred = log.predictions[k].reshape(M_FUTURE, 3)
        for m in range(1, M_FUTURE + 1):
            if k + m < n:
                errors.append(float(np.linalg.norm(pred[m - 1] - log.human[k + m])))
    if not errors:
        return None
    return float(np.mean(errors))


def frame_errors(log: TrialLog):
    """Per-frame prediction error (mean over the horizon steps realized before
    the trial end); nan on frames without a prediction. Used for the
    error-curve report.
    """
    n = log.n_frames
    out = np.full(n, np.nan)
    for k in range(n):
        if np.any(np.isnan(log.predictions[k])):
            continue
        pred = log.predictions[k].reshape(M_FUTURE, 3)
        step_errors = [float(np.linalg.norm(pred[m - 1] - log.human[k + m]))
                       for m in range(1, M_FUTURE + 1) if k + m < n]
        if step_errors:
            out[k] = np.mean(step_errors)
    return out


def safety_index(log: TrialLog):
    """Mean over frames of the minimum human-robot distance, meters."""
    dists = log.min_dist[~np.isnan(log.min_dist)]
    if len(dists) == 0:
        raise ConfigurationError("trial has no human; safety index undefined")
    return float(np.mean(dists))


def ground_truth_drt(config):
    """Mean robot-target distance of the identical trial without the human."""
    unobstructed = replace(config, pattern=None, predictor="none")
    log = run_trial(unobstructed)
    return float(np.mean(log.target_dist))


def efficiency_index(log: TrialLog, d_rt):
    """Ratio of the unobstructed mean robot-target distance to the trial's."""
    if d_rt <= 0:
        raise ConfigurationError(f"d_rt must be positive, got {d_rt}")
    return float(d_rt / np.mean(log.target_dist))


def score_trial(log: TrialLog, d_rt):
    return {
        "prediction_error": prediction_error(log),
        "safety": safety_index(log),
        "efficiency": efficiency_index(log, d_rt),
    }


@dataclass(frozen=True)
class ScoreCell:
    """Mean and unbiased sample variance of one metric over a group of trials."""

    mean: float
    variance: float
    count: int


def _cell(values):
    values = [v for v in values if v is not None]
    if not values:
        return None
    arr = np.asarray(values, dtype=float)
    var = float(np.var(arr, ddof=1)) if len(arr) > 1 else 0.0
    return ScoreCell(float(np.mean(arr)), var, len(arr))


def aggregate(trial_scores):
    """Group per-trial score dicts into per-model (and per model/pattern)
    mean/variance tables.

    `trial_scores` is a list of dicts with keys model, pattern_label, trial,
    prediction_error, safety, efficiency. Empty groups are omitted.
    """
    metrics = ("prediction_error", "safety", "efficiency")
    by_model = {}
    by_model_pattern = {}
    for row in trial_scores:
        by_model.setdefault(row["model"], []).append(row)
        key = (row["model"], row["pattern_label"])
        by_model_pattern.setdefault(key, []).append(row)
    tables = {"per_model": {}, "per_model_pattern": {}}
    for model, rows in sorted(by_model.items()):
        tables["per_model"][model] = {
            m: _cell([r[m] for r in rows]) for m in metrics}
    for key, rows in sorted(by_model_pattern.items()):
        tables["per_model_pattern"][key] = {
            m: _cell([r[m] for r in rows]) for m in metrics}
    return tables
