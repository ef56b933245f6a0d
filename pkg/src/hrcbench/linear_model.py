"""Fixed linear regression transition model.

Prediction is x(k+1) = phi @ theta with a 10x9 parameter matrix; training is
plain minibatch SGD on the squared-residual loss. The closed-form least
squares solve is deliberately not the production path (it lives in the tests
as an oracle).
"""

from dataclasses import dataclass

import numpy as np

from .core import LINEAR_REGRESSOR_DIM, PRED_DIM, ValidationError, check_finite


@dataclass(frozen=True)
class LinearParams:
    theta: np.ndarray  # (10, 9)

    def __post_init__(self):
        theta = check_finite("theta", self.theta)
        if theta.shape != (LINEAR_REGRESSOR_DIM, PRED_DIM):
            raise ValidationError(
                f"theta must be {(LINEAR_REGRESSOR_DIM, PRED_DIM)}, got {theta.shape}"
            )
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.001
    epochs: int = 100
    minibatch_size: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.minibatch_size < 1:
            raise ValidationError(f"minibatch_size must be >= 1, got {self.minibatch_size}")


def _check_phi(phi, d_in):
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (d_in,):
        raise ValidationError(f"regressor must have shape ({d_in},), got {phi.shape}")
    return phi


def lrm_predict(params: LinearParams, phi):
    """Noise-free mean prediction phi @ theta, a 9-vector."""
    phi = _check_phi(phi, params.theta.shape[0])
    return phi @ params.theta


def sample_error(params: LinearParams, phi, target):
    """Squared Euclidean norm of the residual for one sample."""
    residual = np.asarray(target, dtype=float) - lrm_predict(params, phi)
    return float(residual @ residual)


def loss_gradient(theta, phi, target):
    """Gradient of ||target - phi @ theta||^2 w.r.t. theta: -2 * outer(phi, residual)."""
    residual = np.asarray(target, dtype=float) - np.asarray(phi, dtype=float) @ theta
    return -2.0 * np.outer(phi, residual)


def sgd_step(params: LinearParams, phis, targets, learning_rate):
    """One step against the minibatch-averaged gradient."""
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if phis.shape[0] == 0:
        raise ValidationError("minibatch must be non-empty")
    residuals = targets - phis @ params.theta
    grad = -2.0 * phis.T @ residuals / phis.shape[0]
    return LinearParams(params.theta - learning_rate * grad)


def mean_loss(theta, phis, targets):
    residuals = targets - phis @ theta
    return float(np.mean(np.sum(residuals ** 2, axis=1)))


def train_linear(phis, targets, config: TrainingConfig):
    """Minibatch SGD from zero initialization; deterministic given config.seed.

    Returns (LinearParams, per-epoch mean loss trace).
    """
    phis = np.asarray(phis, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n = phis.shape[0]
    if n < config.minibatch_size:
        raise ValidationError(
            f"dataset has {n} samples, smaller than one minibatch ({config.minibatch_size})"
        )
    theta = np.zeros((phis.shape[1], targets.shape[1]))
    rng = np.random.default_rng(config.seed)
    trace = [mean_loss(theta, phis, targets)]
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n - config.minibatch_size + 1, config.minibatch_size):
            idx = order[start:start + config.minibatch_size]
            residuals = targets[idx] - phis[idx] @ theta
            grad = -2.0 * phis[idx].T @ residuals / len(idx)
            theta = theta - config.learning_rate * grad
        trace.append(mean_loss(theta, phis, targets))
    return LinearParams(theta), trace
