"""Recursive-least-squares parameter adaptation for the online model variants.

The parameter vector is the column-stack of the last-layer weight matrix
(40x9 for the network, 10x9 for the linear model). Because the block
regressor has 3M identical diagonal blocks, one d x d gain matrix shared
across the 9 output blocks is algebraically identical to running the full
(9d x 9d) block-diagonal update, so that is what we store.

Update order per step follows the online algorithm: a-priori residual with
the current parameters, gain update, then parameter update with the fresh
gain. With lambda1 = lambda2 = 1 this recursion is exact recursive least
squares and matches the batch normal-equations solution.
"""

from dataclasses import dataclass, replace

import numpy as np

from .core import (M_FUTURE, NumericalDegradation, PRED_DIM, ValidationError,
                   check_finite)

DEFAULT_GAIN_SCALE = 1000.0
DEFAULT_LAMBDA1 = 0.998
DEFAULT_LAMBDA2 = 1.0

SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class LambdaSchedule:
    """Forgetting/weighting factors of the gain update.

    lambda1 = lambda2 = 1: standard least squares gain.
    lambda1 < 1, lambda2 = 1: forgetting factor.
    lambda1 = 1, lambda2 = 0: constant adaptation gain.
    """

    lambda1: float = DEFAULT_LAMBDA1
    lambda2: float = DEFAULT_LAMBDA2

    def __post_init__(self):
        if not 0.0 < self.lambda1 <= 1.0:
            raise ValidationError(f"lambda1 must be in (0, 1], got {self.lambda1}")
        if not 0.0 <= self.lambda2 <= 2.0:
            raise ValidationError(f"lambda2 must be in [0, 2], got {self.lambda2}")


@dataclass(frozen=True)
class AdaptiveState:
    """theta: (d, 3M) block form, column j = parameter block of output j.
    gain: shared (d, d) symmetric positive-definite gain matrix.
    """

    theta: np.ndarray
    gain: np.ndarray
    schedule: LambdaSchedule

    def __post_init__(self):
        theta = check_finite("theta", self.theta)
        gain = check_finite("gain", self.gain)
        d = theta.shape[0]
        if theta.ndim != 2 or theta.shape[1] != PRED_DIM:
            raise ValidationError(f"theta must be (d, {PRED_DIM}), got {theta.shape}")
        if gain.shape != (d, d):
            raise ValidationError(f"gain must be ({d}, {d}), got {gain.shape}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "gain", gain)


def initial_state(theta, schedule=None, gain_scale=DEFAULT_GAIN_SCALE):
    """State seeded from a pre-trained weight matrix with F = gain_scale * I."""
    theta = np.asarray(theta, dtype=float)
    if schedule is None:
        schedule = LambdaSchedule()
    return AdaptiveState(theta.copy(), gain_scale * np.eye(theta.shape[0]), schedule)


def apriori_predict(state: AdaptiveState, feature):
    """Prediction before the next measurement arrives: feature @ theta."""
    feature = np.asarray(feature, dtype=float)
    if feature.shape != (state.theta.shape[0],):
        raise ValidationError(
            f"feature must have shape ({state.theta.shape[0]},), got {feature.shape}"
        )
    return feature @ state.theta


def gain_update(gain, feature, schedule: LambdaSchedule):
    """F' = (1/l1) [F - l2 (F phi phi^T F) / (l1 + l2 phi^T F phi)], symmetrized.

    Raises NumericalDegradation if the result is no longer positive definite;
    the caller resets the gain.
    """
    phi = np.asarray(feature, dtype=float)
    f_phi = gain @ phi
    denom = schedule.lambda1 + schedule.lambda2 * (phi @ f_phi)
    new = (gain - schedule.lambda2 * np.outer(f_phi, f_phi) / denom) / schedule.lambda1
    new = 0.5 * (new + new.T)
    try:
        np.linalg.cholesky(new)
    except np.linalg.LinAlgError:
        raise NumericalDegradation("gain matrix lost positive definiteness") from None
    return new


def theta_update(state: AdaptiveState, feature, observed):
    """One adaptation step: a-priori residual, gain update, parameter update.

    `observed` is the realized 3M-vector for the step predicted by
    apriori_predict with the same feature.
    """
    observed = np.asarray(observed, dtype=float)
    residual = observed - apriori_predict(state, feature)
    new_gain = gain_update(state.gain, feature, state.schedule)
    new_theta = state.theta + np.outer(new_gain @ np.asarray(feature, float), residual)
    return replace(state, theta=new_theta, gain=new_gain)


class AdaptivePredictor:
    """Streams motion windows, adapts once each prediction's horizon realizes.

    The full M-step target of the prediction made at frame k is only observed
    at frame k+M, so updates run with an M-frame delay on the exact
    (regressor, realized target) pair. `feature_fn` maps a MotionWindow to the
    per-output regressor row (hidden features for the network variant, the
    raw 10-entry regressor for the linear variant).
    """

    def __init__(self, feature_fn, state: AdaptiveState, adapt=True,
                 reset_gain_scale=DEFAULT_GAIN_SCALE):
        self.feature_fn = feature_fn
        self.state = state
        self.adapt = adapt
        self.reset_gain_scale = reset_gain_scale
        self._pending = []  # (feature, realized positions so far)

    def step(self, window):
        """Consume the newest window (one new smoothed position) and predict."""
        newest = window.past[-3:]
        if self.adapt:
            for entry in self._pending:
                entry[1].append(newest)
            while self._pending and len(self._pending[0][1]) >= M_FUTURE:
                feature, realized = self._pending.pop(0)
                target = np.concatenate(realized[:M_FUTURE])
                try:
                    self.state = theta_update(self.state, feature, target)
                except NumericalDegradation:
                    self.state = replace(
                        self.state,
                        gain=self.reset_gain_scale * np.eye(self.state.theta.shape[0]),
                    )
        feature = self.feature_fn(window)
        prediction = apriori_predict(self.state, feature)
        if self.adapt:
            self._pending.append((feature, []))
        return prediction
