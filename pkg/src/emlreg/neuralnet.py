"""ReLU multilayer perceptron: init, forward with inverted dropout, backward.

Default architecture is (d, 256, 256, 256, 1). Dropout applies to hidden
activations only, scaled at train time by 1/(1 - rate) so eval-mode
forward needs no rescaling. ReLU subgradient at exactly 0 is 0.
"""

import copy
from dataclasses import dataclass

import numpy as np

__all__ = ["MlpConfig", "MlpParams", "ForwardCache", "he_uniform_init", "forward", "backward"]


@dataclass(frozen=True)
class MlpConfig:
    """Layer widths (input, hidden..., 1) and dropout rate."""

    widths: tuple
    dropout_rate: float = 0.0
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if len(self.widths) < 2:
            raise ValueError("need at least input and output widths")
        if self.widths[-1] != 1:
            raise ValueError("output width must be 1")
        if any(w < 1 for w in self.widths):
            raise ValueError("widths must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation {self.activation!r}")

    @staticmethod
    def default(d):
        """The paper-scale network shape (d, 256, 256, 256, 1)."""
        return MlpConfig(widths=(d, 256, 256, 256, 1))


@dataclass
class MlpParams:
    """Per-layer weight matrices [fan_in x fan_out] and bias vectors."""

    weights: list
    biases: list

    def copy(self):
        return MlpParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def widths(self):
        return tuple([self.weights[0].shape[0]] + [w.shape[1] for w in self.weights])

    @staticmethod
    def zeros_like(other):
        return MlpParams(
            weights=[np.zeros_like(w) for w in other.weights],
            biases=[np.zeros_like(b) for b in other.biases],
        )


@dataclass
class ForwardCache:
    """Backpropagation workspace from one train-mode forward pass."""

    X: np.ndarray
    pre_activations: list
    post_activations: list
    dropout_masks: list
    dropout_rate: float


def he_uniform_init(config, rng):
    """He-uniform weights U(-b, b), b = sqrt(6 / fan_in); zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(config.widths[:-1], config.widths[1:]):
        b = np.sqrt(6.0 / fan_in)
        w = (rng.uniform01(fan_in * fan_out) * 2.0 - 1.0) * b
        weights.append(w.reshape(fan_in, fan_out))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases)


def forward(params, X, train_rng=None, dropout_rate=0.0):
    """Network outputs for each row of X.

    Eval mode (train_rng=None): no dropout, returns (outputs, None).
    Train mode: inverted dropout on hidden activations with the given
    rate, returns (outputs, cache) for a subsequent backward pass.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.weights[0].shape[0]:
        raise ValueError(
            f"input has {X.shape[1] if X.ndim == 2 else '?'} columns, "
            f"network expects {params.weights[0].shape[0]}"
        )
    train = train_rng is not None
    n_layers = len(params.weights)
    pre_acts, post_acts, masks = [], [], []
    a = X
    for layer in range(n_layers):
        z = a @ params.weights[layer] + params.biases[layer]
        if layer < n_layers - 1:  # hidden layer: ReLU then dropout
            pre_acts.append(z)
            a = np.maximum(z, 0.0)
            if train and dropout_rate > 0.0:
                keep = 1.0 - dropout_rate
                mask = train_rng.bernoulli_mask(a.shape, keep)
                a = a * mask / keep
                masks.append(mask)
            else:
                masks.append(None)
            post_acts.append(a)
        else:
            a = z
    outputs = a[:, 0]
    if not train:
        return outputs, None
    cache = ForwardCache(
        X=X,
        pre_activations=pre_acts,
        post_activations=post_acts,
        dropout_masks=masks,
        dropout_rate=dropout_rate,
    )
    return outputs, cache


def backward(params, cache, grad_outputs):
    """Parameter gradients of sum_i grad_outputs[i] * g(X_i; params).

    Uses the cached pre-activations and dropout masks from the matching
    train-mode forward pass.
    """
    if cache is None:
        raise ValueError("backward requires the cache from a train-mode forward pass")
    grad_outputs = np.asarray(grad_outputs, dtype=np.float64)
    n_layers = len(params.weights)
    if len(cache.pre_activations) != n_layers - 1:
        raise ValueError("cache does not match network depth")

    grads = MlpParams.zeros_like(params)
    delta = grad_outputs[:, None]  # gradient w.r.t. current layer's output
    for layer in range(n_layers - 1, -1, -1):
        a_prev = cache.X if layer == 0 else cache.post_activations[layer - 1]
        grads.weights[layer] = a_prev.T @ delta
        grads.biases[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ params.weights[layer].T
            mask = cache.dropout_masks[layer - 1]
            if mask is not None:
                delta = delta * mask / (1.0 - cache.dropout_rate)
            delta = delta * (cache.pre_activations[layer - 1] > 0.0)
    return grads


def clone_params(params):
    """Deep copy helper for checkpoint/warm-start paths."""
    return copy.deepcopy(params)
