"""Closed-loop trial execution.

The robot is reduced to its end-effector point; human-robot distance is the
distance between the human wrist and the end-effector. Each frame: smooth the
human measurement, predict (unless baseline), replan the long-term path only
on the two triggers (new fetch target, or proximity of the human/predicted
human), then take one speed-bounded short-term step with a safety projection
that never lets the robot close in below d_safe. A fetch is complete only
after the end-effector has spent service_frames frames at the target (the
pick-and-place action itself takes time); then the next target is assigned.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .core import (ConfigurationError, MotionWindow, N_PAST, SlidingWindow,
                   smooth_stream)
from .human_sim import MotionPattern, generate_trajectory
from .linear_model import lrm_predict
from .neural_model import nn_forward, nn_hidden
from .rls import AdaptivePredictor, LambdaSchedule, initial_state
from .core import build_linear_regressor, build_network_input

PREDICTOR_NAMES = ("none", "fixed-linear", "fixed-network",
                   "adaptive-linear", "adaptive-network")

DEFAULT_D_SAFE = 0.2
DEFAULT_V_MAX = 0.03          # meters per frame (0.6 m/s at 20 Hz)
REACH_TOLERANCE = 0.02
PROXIMITY_HYSTERESIS = 0.05
DEFLECTION_MARGIN = 1.05      # via points pushed to margin * d_safe
PREDICTION_EXTENSION = 3      # extra constant-velocity keep-out points
STOP_LOCKOUT = 10             # minimum frames held in a protective stop
STOP_RESUME_MARGIN = 0.0      # separation above d_safe required to resume
UPWARD_BIAS = 0.75            # vertical preference when deflecting via points
FLOOR_Z = 0.02                # table surface; the end-effector stays above it
STALL_REPLAN = 20             # frames without progress that force a replan


@dataclass(frozen=True)
class RobotState:
    ee_position: np.ndarray
    base_position: np.ndarray
    target: np.ndarray
    v_max: float = DEFAULT_V_MAX


@dataclass(frozen=True)
class TrialConfig:
    predictor: str
    pattern: MotionPattern          # None runs the trial without a human
    seed: int
    frames: int
    d_safe: float = DEFAULT_D_SAFE
    replan_distance: float = DEFAULT_D_SAFE + 0.1
    v_max: float = DEFAULT_V_MAX
    base_position: tuple = (0.0, -0.45, 0.0)
    start_ee: tuple = (0.0, -0.18, 0.22)
    targets: tuple = ((0.36, -0.06, 0.1), (-0.36, -0.06, 0.1))  # Disk, RAM
    reach_tolerance: float = REACH_TOLERANCE
    service_frames: int = 60

    def __post_init__(self):
        if self.predictor not in PREDICTOR_NAMES:
            raise ConfigurationError(f"unknown predictor {self.predictor!r}")
        if self.d_safe <= 0:
            raise ConfigurationError("d_safe must be positive")
        if self.pattern is not None and self.frames < 2 * N_PAST:
            raise ConfigurationError("trial too short for window warmup")


@dataclass
class TrialLog:
    """Per-frame record of one closed-loop trial."""

    config: TrialConfig
    human: np.ndarray        # (n, 3) smoothed human positions; nan without human
    robot: np.ndarray        # (n, 3) end-effector positions
    predictions: np.ndarray  # (n, 9) flattened M-step predictions; nan when absent
    min_dist: np.ndarray     # (n,) human-to-end-effector distance; nan without human
    replan_flag: np.ndarray  # (n,) 1 on frames with a long-term replan
    target_dist: np.ndarray  # (n,) end-effector distance to the current target
    target_index: np.ndarray  # (n,) which fetch target was active
    projection_flag: np.ndarray  # (n,) 1 on frames where the safety projection fired

    @property
    def n_frames(self):
        return len(self.robot)

    def first_replan_frame(self):
        hits = np.nonzero(self.replan_flag)[0]
        return int(hits[0]) if len(hits) else None

    def first_projection_frame(self):
        hits = np.nonzero(self.projection_flag)[0]
        return int(hits[0]) if len(hits) else None


def make_predictor(name, models):
    """Returns a callable MotionWindow -> 9-vector prediction, or None for the
    baseline. `models` is the dict produced by training (see bench module).
    """
    if name == "none":
        return None
    if models is None:
        raise ConfigurationError(f"predictor {name!r} requires trained models")
    if name == "fixed-linear":
        params = models["linear"]
        return lambda w: lrm_predict(params, build_linear_regressor(w))
    if name == "fixed-network":
        params = models["network"]
        return lambda w: nn_forward(params, build_network_input(w))
    schedule = models.get("schedule", LambdaSchedule())
    gain_scale = models.get("gain_scale", 1000.0)
    if name == "adaptive-linear":
        state = initial_state(models["linear"].theta, schedule, gain_scale)
        return AdaptivePredictor(build_linear_regressor, state,
                                 reset_gain_scale=gain_scale).step
    if name == "adaptive-network":
        net = models["network"]
        state = initial_state(net.output_weights, schedule, gain_scale)
        return AdaptivePredictor(lambda w: nn_hidden(net, build_network_input(w)),
                                 state, reset_gain_scale=gain_scale).step
    raise ConfigurationError(f"unknown predictor {name!r}")


def _segment_clearance(path_a, path_b, obstacle, n_samples=25):
    """Min distance from a densely sampled path segment to a point obstacle."""
    ts = np.linspace(0.0, 1.0, n_samples)
    pts = path_a[None, :] + ts[:, None] * (path_b - path_a)[None, :]
    return float(np.min(np.linalg.norm(pts - obstacle[None, :], axis=1)))


def long_term_plan(start, target, obstacles, d_safe):
    """Straight-line waypoint path deflected around keep-out spheres.

    Each obstacle point carries a keep-out sphere of radius d_safe; via points
    are inserted at DEFLECTION_MARGIN * d_safe until every densely sampled
    path point clears d_safe. If the target itself is inside a keep-out
    sphere the plan holds at the nearest safe standoff point instead.
    """
    start = np.asarray(start, dtype=float)
    target = np.asarray(target, dtype=float)
    obstacles = [np.asarray(o, dtype=float) for o in obstacles]

    for obs in obstacles:
        gap = target - obs
        dist = float(np.linalg.norm(gap))
        if dist < d_safe:
            if dist < 1e-12:
                direction = start - obs
                norm = float(np.linalg.norm(direction))
                direction = direction / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])
            else:
                direction = gap / dist
            target = obs + direction * d_safe

    path = [start, target]
    # A start already inside a keep-out sphere cannot be fixed by via points;
    # prepend an explicit escape waypoint out of the violated spheres.
    escape = start
    for _ in range(8):
        inside = [o for o in obstacles
                  if float(np.linalg.norm(escape - o)) < d_safe]
        if not inside:
            break
        obs = min(inside, key=lambda o: float(np.linalg.norm(escape - o)))
        away = escape - obs
        norm = float(np.linalg.norm(away))
        away = away / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])
        escape = obs + away * (DEFLECTION_MARGIN * d_safe)
        escape[2] = max(escape[2], FLOOR_Z)
    if escape is not start:
        path.insert(1, escape)

    for _ in range(32):
        worst = None
        for i in range(len(path) - 1):
            a, b = path[i], path[i + 1]
            ab = b - a
            seg_len = float(np.linalg.norm(ab))
            if seg_len < 1e-12:
                continue
            for obs in obstacles:
                clearance = _segment_clearance(a, b, obs)
                if clearance < d_safe - 1e-9:
                    # A violation pinned at an endpoint that is itself inside
                    # the sphere is not fixable by inserting a via point.
                    t_end = float(np.clip((obs - a) @ ab / (ab @ ab), 0.0, 1.0))
                    if ((t_end < 1e-6 and float(np.linalg.norm(a - obs)) < d_safe)
                            or (t_end > 1.0 - 1e-6
                                and float(np.linalg.norm(b - obs)) < d_safe)):
                        continue
                    if worst is None or clearance < worst[0]:
                        worst = (clearance, i, a, b, obs)
        if worst is None:
            break
        _, i, a, b, obs = worst
        ab = b - a
        t = float(np.clip((obs - a) @ ab / (ab @ ab), 0.0, 1.0))
        closest = a + t * ab
        away = closest - obs
        norm = float(np.linalg.norm(away))
        if norm < 1e-9:
            # obstacle on the segment: deflect perpendicular to it, deterministic
            axis = np.array([0.0, 0.0, 1.0])
            away = np.cross(ab, axis)
            norm = float(np.linalg.norm(away))
            if norm < 1e-9:
                away = np.cross(ab, np.array([0.0, 1.0, 0.0]))
                norm = float(np.linalg.norm(away))
        # Prefer arcs over the top of the obstacle: detours that dip toward
        # the table or swing behind the human tend to trap the robot.
        away = away / norm + UPWARD_BIAS * np.array([0.0, 0.0, 1.0])
        away = away / float(np.linalg.norm(away))
        via = obs + away * (DEFLECTION_MARGIN * d_safe)
        via[2] = max(via[2], FLOOR_Z)
        path.insert(i + 1, via)
    return [p.copy() for p in path]


def plans_equal(plan_a, plan_b):
    return (plan_a is not None and plan_b is not None
            and len(plan_a) == len(plan_b)
            and all(np.array_equal(a, b) for a, b in zip(plan_a, plan_b)))


def _nominal_step(pos, path, v_max):
    """Step of magnitude <= v_max along the remaining waypoints."""
    for wp in path[1:]:
        gap = wp - pos
        dist = float(np.linalg.norm(gap))
        if dist > 1e-9:
            return gap * min(1.0, v_max / dist)
    return np.zeros(3)


def short_term_step(robot: RobotState, path, threats, d_safe):
    """One speed-bounded step with a safety projection.

    Accepts, in order, the first candidate step whose post-step distance to
    every threat point is >= d_safe or >= the pre-step distance: the nominal
    plan step, the plan step with its toward-threat component removed plus an
    escape component, a pure escape step, and the zero step. Returns
    (new RobotState, projection_fired).
    """
    pos = robot.ee_position
    step = _nominal_step(pos, path, robot.v_max)

    def clamp(p):
        return np.array([p[0], p[1], max(p[2], FLOOR_Z)])

    if not threats:
        return replace(robot, ee_position=clamp(pos + step)), False

    def threat_dist(p):
        return min(float(np.linalg.norm(t - p)) for t in threats)

    pre = threat_dist(pos)
    candidate = clamp(pos + step)
    if threat_dist(candidate) >= min(d_safe, pre) - 1e-12:
        return replace(robot, ee_position=candidate), False

    nearest = min(threats, key=lambda t: float(np.linalg.norm(t - pos)))
    toward = nearest - pos
    norm = float(np.linalg.norm(toward))
    toward = toward / norm if norm > 1e-9 else np.zeros(3)
    away = -toward

    tangent = step - max(0.0, float(step @ toward)) * toward
    blended = tangent + away * robot.v_max
    blended_norm = float(np.linalg.norm(blended))
    if blended_norm > robot.v_max:
        blended = blended * (robot.v_max / blended_norm)

    for cand_step in (blended, away * robot.v_max):
        candidate = clamp(pos + cand_step)
        post = threat_dist(candidate)
        if post >= pre - 1e-12 or post >= d_safe:
            return replace(robot, ee_position=candidate), True
    return replace(robot, ee_position=pos.copy()), True


def run_trial(config: TrialConfig, models=None):
    """Execute one closed-loop trial; deterministic given the config and seed."""
    n = config.frames
    base = np.asarray(config.base_position, dtype=float)
    targets = [np.asarray(t, dtype=float) for t in config.targets]
    robot = RobotState(np.asarray(config.start_ee, dtype=float), base,
                       targets[0], config.v_max)
    predict = make_predictor(config.predictor, models)

    if config.pattern is not None:
        traj = generate_trajectory(config.pattern, config.seed)
        if len(traj.samples) < n:
            raise ConfigurationError(
                f"pattern provides {len(traj.samples)} frames, trial needs {n}")
        smoothed = smooth_stream(traj.positions()[:n])
        label = traj.label
    else:
        smoothed = None
        label = None

    human_log = np.full((n, 3), np.nan)
    robot_log = np.empty((n, 3))
    pred_log = np.full((n, 9), np.nan)
    min_dist = np.full(n, np.nan)
    replan_flag = np.zeros(n, dtype=int)
    target_dist = np.empty(n)
    target_index = np.zeros(n, dtype=int)
    projection_flag = np.zeros(n, dtype=int)

    target_idx = 0
    service = 0
    path = None
    prox_armed = True
    evading = False
    stop_hold = 0
    stall = 0
    best_tdist = np.inf

    for k in range(n):
        prediction = None
        if smoothed is not None:
            human_now = smoothed[k]
            human_log[k] = human_now
            if predict is not None and k >= N_PAST - 1:
                window = MotionWindow(smoothed[k - N_PAST + 1:k + 1].ravel(), label)
                prediction = predict(window)
                pred_log[k] = prediction
            obstacles = [human_now]
            if prediction is not None:
                steps = prediction.reshape(3, 3)
                obstacles.extend(steps)
                # Treat the swept volume the prediction implies as claimed
                # space: continue the predicted velocity a few frames further.
                velocity = steps[2] - steps[1]
                for i in range(1, PREDICTION_EXTENSION + 1):
                    obstacles.append(steps[2] + i * velocity)
            min_dist[k] = float(np.linalg.norm(human_now - robot.ee_position))
            trigger_dist = min(
                float(np.linalg.norm(o - robot.ee_position)) for o in obstacles)
        else:
            obstacles = []
            trigger_dist = np.inf

        # Fetch progress: frames spent within tolerance of the target count
        # toward its service time (protective-stop frames included, so a robot
        # stopped on top of its target still finishes and moves on); after
        # service_frames of them the next target is assigned.
        if (float(np.linalg.norm(robot.ee_position - targets[target_idx]))
                <= config.reach_tolerance):
            service += 1
            stall = 0
            if service >= config.service_frames:
                target_idx = (target_idx + 1) % len(targets)
                service = 0
                path = None
                best_tdist = np.inf

        # Protective stop: an actual separation violation freezes the robot in
        # place for at least STOP_LOCKOUT frames and until the separation is
        # restored with some margin, after which the long-term plan is rebuilt
        # from scratch.
        if smoothed is not None:
            if min_dist[k] < config.d_safe:
                evading = True
                stop_hold = STOP_LOCKOUT
            elif (evading and stop_hold == 0
                  and min_dist[k] >= config.d_safe + STOP_RESUME_MARGIN):
                evading = False
                path = None
        if evading:
            stop_hold = max(0, stop_hold - 1)
            projection_flag[k] = 1
            robot_log[k] = robot.ee_position
            target_dist[k] = float(
                np.linalg.norm(robot.ee_position - targets[target_idx]))
            target_index[k] = target_idx
            continue

        new_task = path is None
        proximity = prox_armed and trigger_dist < config.replan_distance
        if trigger_dist < config.replan_distance:
            prox_armed = False
        elif trigger_dist > config.replan_distance + PROXIMITY_HYSTERESIS:
            prox_armed = True

        if new_task or proximity:
            path = long_term_plan(robot.ee_position, targets[target_idx],
                                  obstacles, config.d_safe)
            replan_flag[k] = 1

        # Drop via points already reached so the follower never walks back.
        while len(path) > 2 and float(
                np.linalg.norm(path[1] - robot.ee_position)) <= 1e-6:
            del path[1]

        robot, projected = short_term_step(robot, path, obstacles, config.d_safe)
        projection_flag[k] = int(projected)
        robot_log[k] = robot.ee_position
        target_dist[k] = float(np.linalg.norm(robot.ee_position - targets[target_idx]))
        target_index[k] = target_idx
        # A plan that stops reducing the target distance is stale; rebuild it.
        if target_dist[k] < best_tdist - 1e-4:
            best_tdist = target_dist[k]
            stall = 0
        else:
            stall += 1
            if stall >= STALL_REPLAN:
                path = None
                stall = 0

    return TrialLog(config, human_log, robot_log, pred_log, min_dist,
                    replan_flag, target_dist, target_index, projection_flag)
