"""File formats: model files, dataset CSV, trial-log CSV, and report CSVs.

All floats are written with 17 significant digits so round trips are exact.
Every file embeds the experiment config hash; readers surface mismatches.
Writes go through a temp file + atomic rename.
"""

import csv
import io
import os

import numpy as np

from .core import ConfigurationError, JointSample, ValidationError
from .human_sim import HumanTrajectory
from .linear_model import LinearParams
from .neural_model import NetworkParams
from .rls import LambdaSchedule
from .robot_sim import TrialConfig, TrialLog

MODEL_MAGIC = "hrcbench-model v1"
DATASET_MAGIC = "hrcbench-dataset v1"
TRIAL_MAGIC = "hrcbench-trial v1"

DATASET_HEADER = ["trial_id", "frame", "label",
                  "raw_x", "raw_y", "raw_z", "x", "y", "z"]
TRIAL_HEADER = (["frame", "hx", "hy", "hz", "rx", "ry", "rz"]
                + [f"pred_m{m}_{ax}" for m in (1, 2, 3) for ax in "xyz"]
                + ["min_dist", "replan_flag"])


def fmt(value):
    return format(float(value), ".17g")


def atomic_write(path, text):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------- model files

def _matrix_lines(name, matrix):
    matrix = np.asarray(matrix, dtype=float)
    lines = [f"matrix {name} {matrix.shape[0]} {matrix.shape[1]}"]
    for row in matrix:
        lines.append(" ".join(fmt(v) for v in row))
    return lines


def write_model_file(path, kind, matrices, scalars=None, config_hash=""):
    """Self-describing text format: magic, kind, scalars, then shape-headed
    row-major matrices.
    """
    lines = [MODEL_MAGIC, f"kind {kind}", f"config_hash {config_hash}"]
    for name, value in (scalars or {}).items():
        lines.append(f"scalar {name} {fmt(value)}")
    for name, matrix in matrices.items():
        lines.extend(_matrix_lines(name, matrix))
    atomic_write(path, "\n".join(lines) + "\n")


def read_model_file(path):
    """Returns (kind, matrices dict, scalars dict, config_hash)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MODEL_MAGIC:
        raise ValidationError(f"{path}: not a model file")
    kind, config_hash = None, ""
    matrices, scalars = {}, {}
    i = 1
    while i < len(lines):
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        if parts[0] == "kind":
            kind = parts[1]
            i += 1
        elif parts[0] == "config_hash":
            config_hash = parts[1] if len(parts) > 1 else ""
            i += 1
        elif parts[0] == "scalar":
            scalars[parts[1]] = float(parts[2])
            i += 1
        elif parts[0] == "matrix":
            name, rows, cols = parts[1], int(parts[2]), int(parts[3])
            block = lines[i + 1:i + 1 + rows]
            if len(block) != rows:
                raise ValidationError(f"{path}: truncated matrix {name}")
            matrices[name] = np.array(
                [[float(v) for v in row.split()] for row in block])
            if matrices[name].shape != (rows, cols):
                raise ValidationError(f"{path}: bad matrix {name} shape")
            i += 1 + rows
        else:
            raise ValidationError(f"{path}: unrecognized line {lines[i]!r}")
    if kind is None:
        raise ValidationError(f"{path}: missing kind")
    return kind, matrices, scalars, config_hash


MODEL_FILES = {
    "linear": "linear.model",
    "network": "network.model",
    "adaptive-linear": "adaptive-linear.model",
    "adaptive-network": "adaptive-network.model",
}


def write_models(models, out_dir, config_hash):
    """Four model files; the adaptive ones embed their frozen counterpart plus
    the gain/forgetting settings they are initialized with.
    """
    os.makedirs(out_dir, exist_ok=True)
    linear = models["linear"]
    network = models["network"]
    schedule = models["schedule"]
    adaptive_scalars = {
        "lambda1": schedule.lambda1,
        "lambda2": schedule.lambda2,
        "gain_scale": models["gain_scale"],
    }
    write_model_file(os.path.join(out_dir, MODEL_FILES["linear"]), "linear",
                     {"theta": linear.theta}, config_hash=config_hash)
    write_model_file(os.path.join(out_dir, MODEL_FILES["network"]), "network",
                     {"U": network.hidden_weights, "W": network.output_weights},
                     config_hash=config_hash)
    write_model_file(os.path.join(out_dir, MODEL_FILES["adaptive-linear"]),
                     "adaptive-linear", {"theta": linear.theta},
                     scalars=adaptive_scalars, config_hash=config_hash)
    write_model_file(os.path.join(out_dir, MODEL_FILES["adaptive-network"]),
                     "adaptive-network",
                     {"U": network.hidden_weights, "W": network.output_weights},
                     scalars=adaptive_scalars, config_hash=config_hash)


def read_models(model_dir):
    """Rebuild the models dict from a directory of model files."""
    paths = {k: os.path.join(model_dir, v) for k, v in MODEL_FILES.items()}
    for name, path in paths.items():
        if not os.path.exists(path):
            raise ConfigurationError(f"missing model file {path}")
    _, lin_m, _, lin_hash = read_model_file(paths["linear"])
    _, net_m, _, _ = read_model_file(paths["network"])
    _, _, scalars, _ = read_model_file(paths["adaptive-network"])
    return {
        "linear": LinearParams(lin_m["theta"]),
        "network": NetworkParams(net_m["U"], net_m["W"]),
        "schedule": LambdaSchedule(scalars["lambda1"], scalars["lambda2"]),
        "gain_scale": scalars["gain_scale"],
        "config_hash": lin_hash,
    }


# ---------------------------------------------------------------- dataset CSV

def write_dataset(trajectories, path, config_hash):
    from .core import smooth_stream

    buf = io.StringIO()
    buf.write(f"# {DATASET_MAGIC}\n# config_hash: {config_hash}\n")
    writer = csv.writer(buf)
    writer.writerow(DATASET_HEADER)
    for t_idx, traj in enumerate(trajectories):
        raw = traj.positions()
        smoothed = smooth_stream(raw)
        for k in range(len(raw)):
            writer.writerow(
                [f"{traj.label}-{t_idx}", k, traj.label]
                + [fmt(v) for v in raw[k]] + [fmt(v) for v in smoothed[k]])
    atomic_write(path, buf.getvalue())


def _read_commented_csv(path, magic):
    meta = {}
    with open(path) as fh:
        lines = fh.readlines()
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        stripped = line[1:].strip()
        if i == 0:
            if stripped != magic:
                raise ValidationError(f"{path}: expected {magic!r} header")
            continue
        key, _, value = stripped.partition(":")
        meta[key.strip()] = value.strip()
    rows = list(csv.reader(lines[body_start:]))
    return meta, rows, body_start


def read_dataset(path):
    """Returns (trajectories, config_hash). Raw positions are kept; the
    smoothed columns are re-derivable and only checked for schema shape.
    """
    meta, rows, offset = _read_commented_csv(path, DATASET_MAGIC)
    if not rows or rows[0] != DATASET_HEADER:
        raise ValidationError(f"{path}: line {offset + 1}: bad header "
                              f"(expected {','.join(DATASET_HEADER)})")
    by_trial = {}
    labels = {}
    for j, row in enumerate(rows[1:], start=offset + 2):
        if not row:
            continue
        if len(row) != len(DATASET_HEADER):
            raise ValidationError(f"{path}: line {j}: expected "
                                  f"{len(DATASET_HEADER)} fields, got {len(row)}")
        try:
            trial_id = row[0]
            frame = int(row[1])
            labels[trial_id] = int(row[2])
            pos = np.array([float(v) for v in row[3:6]])
        except ValueError as exc:
            raise ValidationError(f"{path}: line {j}: {exc}") from exc
        by_trial.setdefault(trial_id, []).append((frame, pos))
    trajectories = []
    for trial_id, frames in by_trial.items():
        frames.sort(key=lambda fp: fp[0])
        samples = tuple(JointSample(pos, frame) for frame, pos in frames)
        trajectories.append(HumanTrajectory(samples, labels[trial_id], -1))
    return trajectories, meta.get("config_hash", "")


# --------------------------------------------------------------- trial log CSV

def trial_log_name(pattern_label, trial_index, predictor):
    return f"trial_p{pattern_label}_t{trial_index:03d}_{predictor}.csv"


def write_trial_log(log: TrialLog, pattern_label, trial_index, path, config_hash):
    cfg = log.config
    buf = io.StringIO()
    buf.write(f"# {TRIAL_MAGIC}\n")
    buf.write(f"# config_hash: {config_hash}\n")
    buf.write(f"# predictor: {cfg.predictor}\n")
    buf.write(f"# pattern_label: {pattern_label}\n")
    buf.write(f"# trial_index: {trial_index}\n")
    buf.write(f"# seed: {cfg.seed}\n")
    buf.write(f"# frames: {cfg.frames}\n")
    buf.write(f"# d_safe: {fmt(cfg.d_safe)}\n")
    buf.write(f"# replan_distance: {fmt(cfg.replan_distance)}\n")
    buf.write(f"# v_max: {fmt(cfg.v_max)}\n")
    buf.write(f"# reach_tolerance: {fmt(cfg.reach_tolerance)}\n")
    buf.write(f"# service_frames: {cfg.service_frames}\n")
    buf.write(f"# base_position: {' '.join(fmt(v) for v in cfg.base_position)}\n")
    buf.write(f"# start_ee: {' '.join(fmt(v) for v in cfg.start_ee)}\n")
    for i, t in enumerate(cfg.targets):
        buf.write(f"# target_{i}: {' '.join(fmt(v) for v in t)}\n")
    writer = csv.writer(buf)
    writer.writerow(TRIAL_HEADER)

    def cell(v):
        return "" if np.isnan(v) else fmt(v)

    for k in range(log.n_frames):
        writer.writerow(
            [k] + [cell(v) for v in log.human[k]]
            + [fmt(v) for v in log.robot[k]]
            + [cell(v) for v in log.predictions[k]]
            + [cell(log.min_dist[k]), int(log.replan_flag[k])])
    atomic_write(path, buf.getvalue())


def read_trial_log(path):
    """Reconstructs a TrialLog (and its grid position) from a serialized CSV.

    The per-frame target distance/index are re-derived from the logged robot
    path and the target metadata; the projection flag is not serialized and
    comes back as zeros.
    """
    meta, rows, offset = _read_commented_csv(path, TRIAL_MAGIC)
    if not rows or rows[0] != TRIAL_HEADER:
        raise ValidationError(f"{path}: line {offset + 1}: bad header")

    def vec(key):
        return tuple(float(v) for v in meta[key].split())

    targets = []
    i = 0
    while f"target_{i}" in meta:
        targets.append(vec(f"target_{i}"))
        i += 1
    cfg = TrialConfig(
        predictor=meta["predictor"],
        pattern=None,
        seed=int(meta["seed"]),
        frames=int(meta["frames"]),
        d_safe=float(meta["d_safe"]),
        replan_distance=float(meta["replan_distance"]),
        v_max=float(meta["v_max"]),
        base_position=vec("base_position"),
        start_ee=vec("start_ee"),
        targets=tuple(targets),
        reach_tolerance=float(meta["reach_tolerance"]),
        service_frames=int(meta["service_frames"]),
    )

    body = rows[1:]
    n = len(body)
    human = np.full((n, 3), np.nan)
    robot = np.empty((n, 3))
    preds = np.full((n, 9), np.nan)
    min_dist = np.full(n, np.nan)
    replan = np.zeros(n, dtype=int)
    for j, row in enumerate(body):
        if len(row) != len(TRIAL_HEADER):
            raise ValidationError(f"{path}: line {offset + 2 + j}: bad row width")
        human[j] = [float(v) if v else np.nan for v in row[1:4]]
        robot[j] = [float(v) for v in row[4:7]]
        preds[j] = [float(v) if v else np.nan for v in row[7:16]]
        min_dist[j] = float(row[16]) if row[16] else np.nan
        replan[j] = int(row[17])

    # replay the fetch-target schedule from the robot path
    target_arr = [np.asarray(t) for t in targets]
    target_dist = np.empty(n)
    target_index = np.zeros(n, dtype=int)
    idx = 0
    served = 0
    prev = np.asarray(cfg.start_ee, dtype=float)
    for k in range(n):
        if float(np.linalg.norm(prev - target_arr[idx])) <= cfg.reach_tolerance:
            served += 1
            if served >= cfg.service_frames:
                idx = (idx + 1) % len(target_arr)
                served = 0
        target_index[k] = idx
        target_dist[k] = float(np.linalg.norm(robot[k] - target_arr[idx]))
        prev = robot[k]

    log = TrialLog(cfg, human, robot, preds, min_dist, replan,
                   target_dist, target_index, np.zeros(n, dtype=int))
    grid = {
        "pattern_label": int(meta["pattern_label"]),
        "trial_index": int(meta["trial_index"]),
        "predictor": meta["predictor"],
        "config_hash": meta.get("config_hash", ""),
    }
    return log, grid


# ----------------------------------------------------------------- report CSVs

def _table_text(header_comment, config_hash, header, rows):
    buf = io.StringIO()
    buf.write(f"# {header_comment}\n# config_hash: {config_hash}\n")
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _metric_cell(value):
    return "n/a" if value is None else fmt(value)


def write_reports(tables, trial_scores, frame_error_curves, out_dir, config_hash):
    """Emit the four report files: prediction-error table, safety/efficiency
    table (with baseline row), per-trial error curves, and the
    safety-vs-efficiency scatter.
    """
    os.makedirs(out_dir, exist_ok=True)
    per_model = tables["per_model"]

    rows = []
    for model in sorted(per_model):
        cell = per_model[model]["prediction_error"]
        if cell is None:
            continue
        rows.append([model, fmt(cell.mean), fmt(cell.variance), cell.count])
    atomic_write(os.path.join(out_dir, "prediction_error_table.csv"),
                 _table_text("hrcbench-report prediction-error", config_hash,
                             ["model", "mean", "variance", "count"], rows))

    rows = []
    for model in sorted(per_model):
        s = per_model[model]["safety"]
        e = per_model[model]["efficiency"]
        rows.append([model, fmt(s.mean), fmt(s.variance),
                     fmt(e.mean), fmt(e.variance), s.count])
    atomic_write(os.path.join(out_dir, "safety_efficiency_table.csv"),
                 _table_text("hrcbench-report safety-efficiency", config_hash,
                             ["model", "safety_mean", "safety_variance",
                              "efficiency_mean", "efficiency_variance", "count"],
                             rows))

    rows = [[c["model"], c["pattern_label"], c["trial"],
             _metric_cell(c["mean_error"]), _metric_cell(c["std_error"])]
            for c in frame_error_curves]
    atomic_write(os.path.join(out_dir, "error_curves.csv"),
                 _table_text("hrcbench-report error-curves", config_hash,
                             ["model", "pattern_label", "trial",
                              "mean_error", "std_error"], rows))

    rows = [[s["model"], s["pattern_label"], s["trial"],
             _metric_cell(s["prediction_error"]),
             fmt(s["safety"]), fmt(s["efficiency"])]
            for s in trial_scores]
    atomic_write(os.path.join(out_dir, "safety_efficiency_scatter.csv"),
                 _table_text("hrcbench-report scatter", config_hash,
                             ["model", "pattern_label", "trial",
                              "prediction_error", "safety", "efficiency"], rows))
