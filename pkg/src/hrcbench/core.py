"""Shared domain types: joint samples, measurement smoothing, sliding windows,
and regressor construction for both model families.

All positions are 3-vectors in meters in a fixed world frame. The stream rate
is 20 Hz (dt = 0.05 s). Windows hold the past N = 3 smoothed positions and
models predict the next M = 3 positions, both flattened oldest/nearest first.
"""

from dataclasses import dataclass, field

import numpy as np

DT = 0.05  # seconds per frame (20 Hz)
N_PAST = 3
M_FUTURE = 3
STATE_DIM = 3 * N_PAST      # flattened past window
PRED_DIM = 3 * M_FUTURE     # flattened predicted future
LINEAR_REGRESSOR_DIM = STATE_DIM + 1   # past + action label
NETWORK_INPUT_DIM = STATE_DIM + 2      # past + action label + constant bias 1

ACTION_LABELS = (1, 2, 3, 4)

FILTER_PREV_WEIGHT = 0.6
FILTER_CUR_WEIGHT = 0.4


class ValidationError(ValueError):
    """Input violates a domain invariant (non-finite values, bad label, ...)."""


class StreamDiscontinuity(RuntimeError):
    """Frame index gap in a measurement stream; the window must be restarted."""


class NumericalDegradation(RuntimeError):
    """An adaptation gain matrix lost positive definiteness beyond tolerance."""


class ConfigurationError(RuntimeError):
    """Inconsistent benchmark configuration (missing model, bad schema, ...)."""


def check_finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values: {value!r}")
    return arr


def check_label(label):
    label = int(label)
    if label not in ACTION_LABELS:
        raise ValidationError(f"action label must be in {ACTION_LABELS}, got {label}")
    return label


@dataclass(frozen=True)
class JointSample:
    """One wrist position measurement at a given frame index."""

    position: np.ndarray
    frame: int

    def __post_init__(self):
        pos = check_finite("position", self.position)
        if pos.shape != (3,):
            raise ValidationError(f"position must be a 3-vector, got shape {pos.shape}")
        if self.frame < 0:
            raise ValidationError(f"frame must be non-negative, got {self.frame}")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class MotionWindow:
    """Past N smoothed positions (flattened, oldest first) plus the action label."""

    past: np.ndarray
    label: int

    def __post_init__(self):
        past = check_finite("past", self.past)
        if past.shape != (STATE_DIM,):
            raise ValidationError(f"window must have {STATE_DIM} entries, got {past.shape}")
        object.__setattr__(self, "past", past)
        object.__setattr__(self, "label", check_label(self.label))


def smooth(prev_raw, current_raw):
    """Low-pass one measurement: 0.6 * previous measurement + 0.4 * current.

    DC gain is exactly 1. For the first sample of a stream pass the sample
    itself as `prev_raw`.
    """
    prev_raw = check_finite("prev_raw", prev_raw)
    current_raw = check_finite("current_raw", current_raw)
    return FILTER_PREV_WEIGHT * prev_raw + FILTER_CUR_WEIGHT * current_raw


def smooth_stream(raw_positions):
    """Apply the low-pass filter to a whole (n, 3) array of raw measurements."""
    raw = check_finite("raw_positions", raw_positions)
    out = np.empty_like(raw)
    out[0] = raw[0]
    out[1:] = FILTER_PREV_WEIGHT * raw[:-1] + FILTER_CUR_WEIGHT * raw[1:]
    return out


@dataclass
class SlidingWindow:
    """Consumes consecutive JointSamples, smooths them, and emits MotionWindows
    once N samples are held. Frames must be consecutive; a gap raises
    StreamDiscontinuity and the caller restarts with a fresh instance.
    """

    label: int
    _smoothed: list = field(default_factory=list)
    _last_raw: np.ndarray = None
    _last_frame: int = None

    def __post_init__(self):
        self.label = check_label(self.label)

    def push(self, sample: JointSample):
        """Returns a MotionWindow once warm, else None."""
        if self._last_frame is not None and sample.frame != self._last_frame + 1:
            raise StreamDiscontinuity(
                f"expected frame {self._last_frame + 1}, got {sample.frame}"
            )
        prev = sample.position if self._last_raw is None else self._last_raw
        self._smoothed.append(smooth(prev, sample.position))
        self._last_raw = sample.position
        self._last_frame = sample.frame
        if len(self._smoothed) > N_PAST:
            self._smoothed.pop(0)
        if len(self._smoothed) == N_PAST:
            return MotionWindow(np.concatenate(self._smoothed), self.label)
        return None


def build_linear_regressor(window: MotionWindow):
    """[past(9), label] — the 10-entry regressor of the linear model."""
    return np.concatenate([window.past, [float(window.label)]])


def build_network_input(window: MotionWindow):
    """[past(9), label, 1] — the 11-entry network input with constant bias."""
    return np.concatenate([window.past, [float(window.label), 1.0]])
