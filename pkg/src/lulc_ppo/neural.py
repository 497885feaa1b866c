"""Small feed-forward approximators with exact analytic gradients.

Both the actor (7 logits) and the critic (1 value) are multilayer
perceptrons with tanh hidden layers and a linear output, stored as plain
float64 arrays. Backpropagation is written out by hand; tests check it
against central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .rng import Xoshiro256StarStar

MASKED_LOGIT = -1e9

POLICY_LAYERS = (15, 64, 64, 7)
VALUE_LAYERS = (15, 64, 64, 1)


@dataclass
class MlpParams:
    """Layer weights (out, in) and biases (out,), hidden activations tanh."""

    weights: list
    biases: list

    @property
    def layer_sizes(self) -> tuple:
        return (self.weights[0].shape[1], *(w.shape[0] for w in self.weights))

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def assert_finite(self) -> None:
        for arr in (*self.weights, *self.biases):
            if not np.isfinite(arr).all():
                raise FloatingPointError("non-finite network parameter")


def init_mlp(layer_sizes, rng: Xoshiro256StarStar, out_scale: float = 1.0) -> MlpParams:
    """Scaled-uniform init, gain 1/sqrt(fan_in); biases zero.

    ``out_scale`` shrinks the output layer (0.01 for the policy head keeps
    the initial action distribution near uniform).
    """
    weights, biases = [], []
    n_layers = len(layer_sizes) - 1
    for li in range(n_layers):
        fan_in, fan_out = layer_sizes[li], layer_sizes[li + 1]
        bound = 1.0 / math.sqrt(fan_in)
        w = np.empty((fan_out, fan_in))
        for i in range(fan_out):
            for j in range(fan_in):
                w[i, j] = rng.uniform(-bound, bound)
        if li == n_layers - 1:
            w *= out_scale
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def forward(params: MlpParams, obs: np.ndarray) -> np.ndarray:
    """Apply the network to one observation (1-d) or a batch (2-d)."""
    x = np.asarray(obs, dtype=np.float64)
    in_size = params.weights[0].shape[1]
    if x.shape[-1] != in_size:
        raise ShapeMismatch(f"input size {x.shape[-1]} does not match network input {in_size}")
    last = len(params.weights) - 1
    if x.ndim == 1:
        for li, (w, b) in enumerate(zip(params.weights, params.biases)):
            x = w @ x + b
            if li != last:
                x = np.tanh(x)
        return x
    if x.ndim == 2:
        for li, (w, b) in enumerate(zip(params.weights, params.biases)):
            x = x @ w.T + b
            if li != last:
                x = np.tanh(x)
        return x
    raise ShapeMismatch(f"observation must be 1-d or 2-d, got shape {x.shape}")


def backward(params: MlpParams, obs: np.ndarray, output_grad: np.ndarray) -> MlpParams:
    """Exact gradients of sum(output * output_grad) w.r.t. every parameter.

    For batched inputs the per-sample gradients are summed; fold any 1/B
    factor into ``output_grad``. Returns gradients with parameter shapes.
    """
    x = np.asarray(obs, dtype=np.float64)
    g = np.asarray(output_grad, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
        g = g[None, :]
    if x.ndim != 2 or g.ndim != 2:
        raise ShapeMismatch("obs and output_grad must both be 1-d or both 2-d")
    if x.shape[0] != g.shape[0]:
        raise ShapeMismatch(f"batch sizes differ: obs {x.shape[0]}, output_grad {g.shape[0]}")
    out_size = params.weights[-1].shape[0]
    if x.shape[1] != params.weights[0].shape[1] or g.shape[1] != out_size:
        raise ShapeMismatch("obs or output_grad width does not match the architecture")

    last = len(params.weights) - 1
    activations = [x]
    h = x
    for li, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w.T + b
        if li != last:
            h = np.tanh(h)
        activations.append(h)

    w_grads = [None] * len(params.weights)
    b_grads = [None] * len(params.biases)
    delta = g
    for li in range(last, -1, -1):
        w_grads[li] = delta.T @ activations[li]
        b_grads[li] = delta.sum(axis=0)
        if li > 0:
            delta = (delta @ params.weights[li]) * (1.0 - activations[li] ** 2)
    return MlpParams(w_grads, b_grads)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=-1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def masked_logits(logits: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    if mask is None:
        return logits
    return np.where(mask, logits, MASKED_LOGIT)


@dataclass
class CategoricalDist:
    """Softmax distribution over actions, with optional legality mask."""

    logits: np.ndarray  # raw logits, shape (n,)
    mask: np.ndarray | None = None  # bool (n,); False entries get logit -1e9

    def __post_init__(self):
        self.logits = masked_logits(np.asarray(self.logits, dtype=np.float64), self.mask)

    def log_probs(self) -> np.ndarray:
        return log_softmax(self.logits)

    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs())

    def sample(self, rng: Xoshiro256StarStar) -> tuple[int, float]:
        """Inverse-CDF draw from one uniform; returns (action, log_prob)."""
        log_p = self.log_probs()
        p = np.exp(log_p)
        u = rng.random()
        acc = 0.0
        action = None
        for k in range(p.size):
            if p[k] <= 0.0:
                continue
            action = k
            acc += p[k]
            if u < acc:
                break
        # float tail: acc can end slightly below 1; fall back to the last legal action
        return action, float(log_p[action])

    def entropy(self) -> float:
        log_p = self.log_probs()
        p = np.exp(log_p)
        return float(-np.sum(np.where(p > 0.0, p * log_p, 0.0)))


@dataclass
class AdamState:
    """First/second moment accumulators mirroring the parameter shapes."""

    m: MlpParams
    v: MlpParams
    t: int = 0
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: MlpParams, lr: float = 3e-4) -> "AdamState":
        zeros = lambda: MlpParams(
            [np.zeros_like(w) for w in params.weights], [np.zeros_like(b) for b in params.biases]
        )
        return cls(m=zeros(), v=zeros(), lr=lr)


def adam_update(params: MlpParams, grads: MlpParams, state: AdamState) -> MlpParams:
    """Standard bias-corrected Adam step; mutates ``params`` and ``state``."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**state.t
    bias2 = 1.0 - b2**state.t
    for group, ggroup, mgroup, vgroup in (
        (params.weights, grads.weights, state.m.weights, state.v.weights),
        (params.biases, grads.biases, state.m.biases, state.v.biases),
    ):
        for p, g, m, v in zip(group, ggroup, mgroup, vgroup):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
    return params
