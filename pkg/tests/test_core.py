"""Unit tests for the shared domain types and the measurement filter."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrcbench.core import (JointSample, MotionWindow, N_PAST, SlidingWindow,
                           StreamDiscontinuity, ValidationError,
                           build_linear_regressor, build_network_input,
                           check_label, smooth, smooth_stream)


def test_smooth_weights():
    prev = np.array([1.0, 0.0, 0.0])
    cur = np.array([0.0, 1.0, 0.0])
    np.testing.assert_allclose(smooth(prev, cur), [0.6, 0.4, 0.0])


def test_smooth_dc_gain_is_one():
    p = np.array([0.3, -0.2, 0.7])
    np.testing.assert_allclose(smooth(p, p), p)


def test_smooth_stream_matches_scalar_filter():
    rng = np.random.default_rng(3)
    raw = rng.normal(size=(50, 3))
    out = smooth_stream(raw)
    np.testing.assert_allclose(out[0], raw[0])
    for k in range(1, len(raw)):
        np.testing.assert_allclose(out[k], smooth(raw[k - 1], raw[k]))


def test_smooth_rejects_non_finite():
    with pytest.raises(ValidationError):
        smooth(np.array([np.nan, 0, 0]), np.zeros(3))


def test_joint_sample_validation():
    with pytest.raises(ValidationError):
        JointSample(np.zeros(2), 0)
    with pytest.raises(ValidationError):
        JointSample(np.zeros(3), -1)


def test_check_label():
    assert check_label(2) == 2
    with pytest.raises(ValidationError):
        check_label(5)
    with pytest.raises(ValidationError):
        check_label(0)


def test_motion_window_shape():
    with pytest.raises(ValidationError):
        MotionWindow(np.zeros(8), 1)
    w = MotionWindow(np.arange(9, dtype=float), 3)
    assert w.label == 3


def test_sliding_window_warmup_and_contents():
    rng = np.random.default_rng(7)
    raw = rng.normal(size=(8, 3))
    sw = SlidingWindow(label=2)
    windows = [sw.push(JointSample(p, k)) for k, p in enumerate(raw)]
    assert all(w is None for w in windows[:N_PAST - 1])
    smoothed = smooth_stream(raw)
    for k in range(N_PAST - 1, len(raw)):
        expected = smoothed[k - N_PAST + 1:k + 1].ravel()
        np.testing.assert_allclose(windows[k].past, expected)
        assert windows[k].label == 2


def test_sliding_window_frame_gap_raises():
    sw = SlidingWindow(label=1)
    sw.push(JointSample(np.zeros(3), 0))
    with pytest.raises(StreamDiscontinuity):
        sw.push(JointSample(np.zeros(3), 2))


def test_regressor_builders():
    w = MotionWindow(np.arange(9, dtype=float), 4)
    phi = build_linear_regressor(w)
    s = build_network_input(w)
    assert phi.shape == (10,)
    assert s.shape == (11,)
    np.testing.assert_allclose(phi[:9], w.past)
    assert phi[9] == 4.0
    np.testing.assert_allclose(s[:10], phi)
    assert s[10] == 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_smooth_stays_between_inputs(prev, cur):
    out = smooth(np.array(prev), np.array(cur))
    lo = np.minimum(prev, cur) - 1e-12
    hi = np.maximum(prev, cur) + 1e-12
    assert np.all(out >= lo) and np.all(out <= hi)
