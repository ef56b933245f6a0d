"""Synthetic human wrist-motion generator.

Four built-in motion patterns stand in for the recorded human motions: each
is a waypoint sequence traversed with a piecewise minimum-jerk time profile
(zero velocity/acceleration at waypoints, so segments join C2-continuously),
plus i.i.d. Gaussian measurement noise. A drift transform translates
waypoints progressively over a trial to create train/test mismatch for the
adaptation experiments.
"""

from dataclasses import dataclass, replace

import numpy as np

from .core import (JointSample, M_FUTURE, N_PAST, ValidationError, check_finite,
                   check_label, smooth_stream)

DEFAULT_NOISE_SIGMA = 0.001  # meters, per axis


@dataclass(frozen=True)
class MotionPattern:
    label: int
    waypoints: tuple          # of 3-vectors
    duration_frames: int
    noise_sigma: float = DEFAULT_NOISE_SIGMA

    def __post_init__(self):
        object.__setattr__(self, "label", check_label(self.label))
        wps = tuple(check_finite("waypoint", w) for w in self.waypoints)
        if len(wps) < 2:
            raise ValidationError("pattern needs at least 2 waypoints")
        object.__setattr__(self, "waypoints", wps)
        if self.duration_frames < 2 * N_PAST:
            raise ValidationError(
                f"duration must be >= {2 * N_PAST} frames, got {self.duration_frames}"
            )
        if self.noise_sigma < 0:
            raise ValidationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class HumanTrajectory:
    samples: tuple  # of JointSample, frames consecutive from 0
    label: int
    seed: int

    def positions(self):
        return np.array([s.position for s in self.samples])


def _min_jerk_profile(tau):
    """Scalar minimum-jerk interpolant on [0, 1]: zero vel/acc at both ends."""
    return 10.0 * tau ** 3 - 15.0 * tau ** 4 + 6.0 * tau ** 5


def waypoint_frames(pattern: MotionPattern):
    """Frame index at which each waypoint is scheduled (first = 0, last = T-1)."""
    n_seg = len(pattern.waypoints) - 1
    last = pattern.duration_frames - 1
    return [round(i * last / n_seg) for i in range(n_seg + 1)]


def noiseless_positions(pattern: MotionPattern):
    """(duration_frames, 3) array interpolating the waypoints, waypoint-exact."""
    frames = waypoint_frames(pattern)
    for i in range(len(frames) - 1):
        if frames[i + 1] <= frames[i]:
            raise ValidationError(
                "degenerate pattern: consecutive waypoints scheduled on the same frame"
            )
    out = np.empty((pattern.duration_frames, 3))
    for i in range(len(frames) - 1):
        a, b = frames[i], frames[i + 1]
        p0, p1 = pattern.waypoints[i], pattern.waypoints[i + 1]
        tau = np.arange(a, b + 1) - a
        s = _min_jerk_profile(tau / (b - a))
        out[a:b + 1] = p0 + s[:, None] * (p1 - p0)
    return out


def generate_trajectory(pattern: MotionPattern, seed):
    """Noiseless interpolation plus seeded per-axis Gaussian noise."""
    clean = noiseless_positions(pattern)
    rng = np.random.default_rng(seed)
    noisy = clean + rng.normal(0.0, pattern.noise_sigma, size=clean.shape)
    samples = tuple(JointSample(p, k) for k, p in enumerate(noisy))
    return HumanTrajectory(samples, pattern.label, int(seed))


def trajectory_seed(master_seed, label, index):
    """Stable per-trajectory seed derived from the master seed."""
    ss = np.random.SeedSequence([int(master_seed), int(label), int(index)])
    return int(ss.generate_state(1)[0])


def generate_dataset(patterns, trajectories_per_pattern=30, seed=0):
    """30 seeded trajectories per pattern by default, deterministic per seed."""
    out = []
    for pattern in patterns:
        for i in range(trajectories_per_pattern):
            out.append(generate_trajectory(
                pattern, trajectory_seed(seed, pattern.label, i)))
    return out


def apply_drift(pattern: MotionPattern, drift_per_100_frames):
    """Translate waypoints progressively: the waypoint scheduled at frame f is
    shifted by drift * f / 100 (so the final waypoint of a T-frame pattern
    moves by drift * T / 100, up to the T-1 endpoint convention).
    """
    drift = check_finite("drift", drift_per_100_frames)
    frames = waypoint_frames(pattern)
    last = frames[-1]
    scale = pattern.duration_frames / 100.0
    shifted = tuple(
        np.asarray(w, float) + drift * scale * (f / last)
        for w, f in zip(pattern.waypoints, frames)
    )
    return replace(pattern, waypoints=shifted)


def tile_pattern(pattern: MotionPattern, cycles):
    """Repeat the waypoint cycle to cover a longer trial."""
    if cycles < 1:
        raise ValidationError("cycles must be >= 1")
    wps = list(pattern.waypoints)
    for _ in range(cycles - 1):
        wps.extend(pattern.waypoints[1:])
    return replace(pattern, waypoints=tuple(wps),
                   duration_frames=pattern.duration_frames * cycles)


def default_patterns(noise_sigma=DEFAULT_NOISE_SIGMA):
    """Four stand-in wrist motions sharing a central work lane.

    The human works from a home position near the table center and jabs into
    the lane between the robot's two fetch targets, dwelling briefly at the
    tip of each reach (the repeated waypoint) before retracting. Cycle times
    differ across patterns so their rhythms are distinguishable.
    """
    home1 = np.array([0.0, 0.14, 0.15])
    home2 = np.array([-0.06, 0.13, 0.18])
    home3 = np.array([0.06, 0.14, 0.13])
    tip1 = np.array([0.0, -0.08, 0.10])
    tip2 = np.array([0.05, -0.10, 0.12])
    tip3a = np.array([-0.06, -0.08, 0.10])
    tip3b = np.array([0.06, -0.04, 0.14])
    tip4 = np.array([-0.04, -0.12, 0.10])

    def pat(label, wps, duration_frames):
        return MotionPattern(label, tuple(wps), duration_frames, noise_sigma)

    return [
        pat(1, [home1, tip1, tip1, home1], 14),                   # straight jab
        pat(2, [home2, tip2, tip2, home2], 13),                   # offset jab
        pat(3, [home3, tip3a, tip3a, home3, tip3b, home3], 21),   # double reach
        pat(4, [home1, tip4, tip4, home1], 15),                   # deep jab
    ]


def training_pairs(trajectories):
    """Convert trajectories into (window, M-step target) training arrays.

    Returns (windows, targets): windows is a list of MotionWindow, targets an
    (n, 3M) array of the next M smoothed positions, flattened nearest first.
    """
    from .core import MotionWindow

    windows, targets = [], []
    for traj in trajectories:
        smoothed = smooth_stream(traj.positions())
        n = len(smoothed)
        for k in range(N_PAST - 1, n - M_FUTURE):
            past = smoothed[k - N_PAST + 1:k + 1].ravel()
            target = smoothed[k + 1:k + 1 + M_FUTURE].ravel()
            windows.append(MotionWindow(past, traj.label))
            targets.append(target)
    return windows, np.array(targets)
