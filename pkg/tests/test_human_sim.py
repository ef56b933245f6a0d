"""Tests for the synthetic human motion generator."""

import numpy as np
import pytest

from hrcbench.core import M_FUTURE, N_PAST, ValidationError, smooth_stream
from hrcbench.human_sim import (MotionPattern, apply_drift, default_patterns,
                                generate_dataset, generate_trajectory,
                                noiseless_positions, tile_pattern,
                                training_pairs, trajectory_seed,
                                waypoint_frames)


def simple_pattern(duration=20, sigma=0.0):
    wps = (np.array([0.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]),
           np.array([0.0, 1.0, 0.0]))
    return MotionPattern(1, wps, duration, sigma)


def test_noiseless_positions_hit_waypoints_exactly():
    pat = simple_pattern()
    pos = noiseless_positions(pat)
    frames = waypoint_frames(pat)
    assert frames[0] == 0 and frames[-1] == pat.duration_frames - 1
    for f, wp in zip(frames, pat.waypoints):
        np.testing.assert_array_equal(pos[f], wp)


def test_noiseless_positions_zero_velocity_at_waypoints():
    pat = simple_pattern(duration=41)
    pos = noiseless_positions(pat)
    frames = waypoint_frames(pat)
    # minimum-jerk segments start and end at rest, so the one-frame motion
    # next to an interior waypoint is much smaller than mid-segment motion
    f = frames[1]
    near = np.linalg.norm(pos[f + 1] - pos[f])
    mid = np.linalg.norm(pos[f + 10] - pos[f + 9])
    assert near < 0.2 * mid


def test_repeated_waypoint_is_a_dwell():
    wps = (np.zeros(3), np.ones(3), np.ones(3), np.zeros(3))
    pat = MotionPattern(1, wps, 30, 0.0)
    pos = noiseless_positions(pat)
    frames = waypoint_frames(pat)
    segment = pos[frames[1]:frames[2] + 1]
    np.testing.assert_allclose(segment, np.ones_like(segment))


def test_generate_trajectory_deterministic_and_seed_sensitive():
    pat = simple_pattern(sigma=0.01)
    a = generate_trajectory(pat, 42).positions()
    b = generate_trajectory(pat, 42).positions()
    c = generate_trajectory(pat, 43).positions()
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_zero_noise_matches_noiseless():
    pat = simple_pattern(sigma=0.0)
    traj = generate_trajectory(pat, 0)
    np.testing.assert_array_equal(traj.positions(), noiseless_positions(pat))


def test_trajectory_seed_distinct():
    seeds = {trajectory_seed(0, label, i) for label in (1, 2) for i in range(10)}
    assert len(seeds) == 20


def test_generate_dataset_counts_and_labels():
    pats = default_patterns(0.001)
    trajs = generate_dataset(pats, trajectories_per_pattern=3, seed=0)
    assert len(trajs) == 12
    assert sorted({t.label for t in trajs}) == [1, 2, 3, 4]


def test_tile_pattern_geometry():
    pat = simple_pattern()
    tiled = tile_pattern(pat, 3)
    assert tiled.duration_frames == 3 * pat.duration_frames
    assert len(tiled.waypoints) == 3 * (len(pat.waypoints) - 1) + 1
    with pytest.raises(ValidationError):
        tile_pattern(pat, 0)


def test_apply_drift_endpoint_shift():
    pat = simple_pattern(duration=50)
    drift = np.array([0.1, -0.2, 0.3])
    shifted = apply_drift(pat, drift)
    np.testing.assert_array_equal(shifted.waypoints[0], pat.waypoints[0])
    np.testing.assert_allclose(
        shifted.waypoints[-1],
        np.asarray(pat.waypoints[-1]) + drift * pat.duration_frames / 100.0)


def test_default_patterns_are_valid_and_distinct():
    pats = default_patterns()
    assert [p.label for p in pats] == [1, 2, 3, 4]
    durations = {p.duration_frames for p in pats}
    assert len(durations) == 4
    for p in pats:
        noiseless_positions(p)  # must interpolate without degeneracy


def test_training_pairs_alignment():
    pat = simple_pattern(duration=15, sigma=0.005)
    traj = generate_trajectory(pat, 5)
    windows, targets = training_pairs([traj])
    smoothed = smooth_stream(traj.positions())
    n = len(smoothed)
    assert len(windows) == n - N_PAST - M_FUTURE + 1
    assert targets.shape == (len(windows), 3 * M_FUTURE)
    k = N_PAST - 1  # first window ends at this frame
    np.testing.assert_allclose(windows[0].past, smoothed[:N_PAST].ravel())
    np.testing.assert_allclose(targets[0], smoothed[k + 1:k + 1 + M_FUTURE].ravel())
    assert windows[0].label == traj.label
