"""Fixed feed-forward ReLU network: 11 inputs -> 40 hidden -> 9 outputs.

The hidden bias rides on the constant-1 entry of the input vector, so the
whole network is two weight matrices. The post-ReLU hidden activations are
exposed separately because the online-adaptation stage reuses them as a
frozen feature extractor.
"""

from dataclasses import dataclass

import numpy as np

from .core import NETWORK_INPUT_DIM, PRED_DIM, ValidationError, check_finite
from .linear_model import TrainingConfig

HIDDEN_UNITS = 40


@dataclass(frozen=True)
class NetworkParams:
    hidden_weights: np.ndarray  # (n_h, 11), hidden pre-activation = U @ s
    output_weights: np.ndarray  # (n_h, 9), output = W.T @ relu(U @ s)

    def __post_init__(self):
        u = check_finite("hidden_weights", self.hidden_weights)
        w = check_finite("output_weights", self.output_weights)
        if u.ndim != 2 or w.ndim != 2 or u.shape[0] != w.shape[0]:
            raise ValidationError(f"inconsistent shapes U {u.shape}, W {w.shape}")
        object.__setattr__(self, "hidden_weights", u)
        object.__setattr__(self, "output_weights", w)

    @property
    def n_hidden(self):
        return self.hidden_weights.shape[0]


def init_network(seed, n_hidden=HIDDEN_UNITS, n_in=NETWORK_INPUT_DIM, n_out=PRED_DIM):
    """Uniform(+-sqrt(6/(fan_in+fan_out))) initialization, seeded."""
    rng = np.random.default_rng(seed)
    bound_u = np.sqrt(6.0 / (n_in + n_hidden))
    bound_w = np.sqrt(6.0 / (n_hidden + n_out))
    u = rng.uniform(-bound_u, bound_u, size=(n_hidden, n_in))
    w = rng.uniform(-bound_w, bound_w, size=(n_hidden, n_out))
    return NetworkParams(u, w)


def _check_input(params, s):
    s = np.asarray(s, dtype=float)
    if s.shape != (params.hidden_weights.shape[1],):
        raise ValidationError(
            f"input must have shape ({params.hidden_weights.shape[1]},), got {s.shape}"
        )
    return s


def nn_hidden(params: NetworkParams, s):
    """Post-ReLU hidden activations max(0, U @ s); every entry >= 0."""
    s = _check_input(params, s)
    return np.maximum(0.0, params.hidden_weights @ s)


def nn_forward(params: NetworkParams, s):
    """Network prediction W.T @ max(0, U @ s), a 9-vector."""
    return params.output_weights.T @ nn_hidden(params, s)


def nn_gradients(params: NetworkParams, s, target):
    """Exact gradients of ||target - nn_forward(s)||^2 w.r.t. (U, W).

    ReLU subgradient at exactly 0 is taken as 0.
    """
    s = _check_input(params, s)
    target = np.asarray(target, dtype=float)
    pre = params.hidden_weights @ s
    h = np.maximum(0.0, pre)
    residual = target - params.output_weights.T @ h
    grad_w = -2.0 * np.outer(h, residual)
    delta = -2.0 * (params.output_weights @ residual) * (pre > 0)
    grad_u = np.outer(delta, s)
    return grad_u, grad_w


def _batch_loss(u, w, inputs, targets):
    h = np.maximum(0.0, inputs @ u.T)
    residuals = targets - h @ w
    return float(np.mean(np.sum(residuals ** 2, axis=1)))


def train_network(inputs, targets, config: TrainingConfig, n_hidden=HIDDEN_UNITS):
    """Minibatch SGD on the L2 loss; deterministic given config.seed.

    Returns (NetworkParams, per-epoch mean loss trace).
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n = inputs.shape[0]
    if n < config.minibatch_size:
        raise ValidationError(
            f"dataset has {n} samples, smaller than one minibatch ({config.minibatch_size})"
        )
    params = init_network(config.seed, n_hidden=n_hidden,
                          n_in=inputs.shape[1], n_out=targets.shape[1])
    u = params.hidden_weights.copy()
    w = params.output_weights.copy()
    rng = np.random.default_rng(config.seed)
    trace = [_batch_loss(u, w, inputs, targets)]
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n - config.minibatch_size + 1, config.minibatch_size):
            idx = order[start:start + config.minibatch_size]
            x = inputs[idx]
            pre = x @ u.T                      # (m, n_h)
            h = np.maximum(0.0, pre)
            residuals = targets[idx] - h @ w   # (m, 9)
            m = len(idx)
            grad_w = -2.0 * h.T @ residuals / m
            delta = -2.0 * (residuals @ w.T) * (pre > 0)   # (m, n_h)
            grad_u = delta.T @ x / m
            u -= config.learning_rate * grad_u
            w -= config.learning_rate * grad_w
        trace.append(_batch_loss(u, w, inputs, targets))
    return NetworkParams(u, w), trace
