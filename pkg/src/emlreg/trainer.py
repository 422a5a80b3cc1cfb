"""Full-batch Adam training loop, fine-tuning, and checkpoint persistence.

Each epoch runs one forward pass on the whole training set (train mode,
dropout active), maps the loss gradient on residuals e = Y - g(X) to
output gradients (-grad), backpropagates, and takes one Adam step.
Stopping: after min_epochs, when the relative change of the windowed mean
loss over convergence_window epochs drops below convergence_tol, or at
max_epochs. The returned model is the best-so-far by windowed mean loss.

The EML objective is translation-invariant in the residuals, so after EML
training the output bias is recentered to make the mean training residual
zero (median optional).
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .losses import EML, batch_loss_and_grad
from .neuralnet import MlpConfig, MlpParams, backward, forward, he_uniform_init
from .numerics import RngState

__all__ = [
    "AdamState",
    "TrainConfig",
    "TrainReport",
    "DivergenceError",
    "CheckpointError",
    "adam_step",
    "train",
    "fine_tune",
    "recenter_intercept",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_FORMAT_VERSION = 1


class DivergenceError(RuntimeError):
    """Raised when the training loss stays non-finite; carries the history."""

    def __init__(self, message, loss_history):
        super().__init__(message)
        self.loss_history = loss_history


class CheckpointError(ValueError):
    """Malformed or incompatible checkpoint file."""


@dataclass
class AdamState:
    """First/second moment accumulators shaped like the parameters."""

    m: MlpParams
    v: MlpParams
    t: int = 0

    @staticmethod
    def zeros_like(params):
        return AdamState(m=MlpParams.zeros_like(params), v=MlpParams.zeros_like(params), t=0)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-4
    betas: tuple = (0.9, 0.99)
    epsilon: float = 1e-8
    min_epochs: int = 1000
    max_epochs: int = 5000
    convergence_tol: float = 1e-6
    convergence_window: int = 50
    dropout_rate: float = 0.01
    seed: int = 0
    recenter_by_median: bool = False

    def __post_init__(self):
        if self.min_epochs > self.max_epochs:
            raise ValueError("min_epochs must not exceed max_epochs")
        b1, b2 = self.betas
        if not (0.0 < b1 < 1.0 and 0.0 < b2 < 1.0):
            raise ValueError("betas must lie in (0, 1)")


@dataclass
class TrainReport:
    model: MlpParams
    loss_history: np.ndarray
    epochs_run: int
    recentering_shift: float = 0.0


def adam_step(params, grads, state, cfg):
    """One Adam update with bias correction; returns (new params, new state)."""
    b1, b2 = cfg.betas
    t = state.t + 1
    new_params = MlpParams.zeros_like(params)
    new_m = MlpParams.zeros_like(params)
    new_v = MlpParams.zeros_like(params)
    for kind in ("weights", "biases"):
        for i, (p, g, m, v) in enumerate(
            zip(
                getattr(params, kind),
                getattr(grads, kind),
                getattr(state.m, kind),
                getattr(state.v, kind),
            )
        ):
            if p.shape != g.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
            m2 = b1 * m + (1.0 - b1) * g
            v2 = b2 * v + (1.0 - b2) * g * g
            m_hat = m2 / (1.0 - b1**t)
            v_hat = v2 / (1.0 - b2**t)
            getattr(new_m, kind)[i] = m2
            getattr(new_v, kind)[i] = v2
            getattr(new_params, kind)[i] = p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return new_params, AdamState(m=new_m, v=new_v, t=t)


def recenter_intercept(model, data, use_median=False):
    """Shift the output bias so training residuals average (or median) zero."""
    preds, _ = forward(model, data.X)
    resid = data.Y - preds
    shift = float(np.median(resid)) if use_median else float(np.mean(resid))
    shifted = model.copy()
    shifted.biases[-1] = shifted.biases[-1] + shift
    return shifted, shift


def train(data, loss, net, cfg, init="fresh"):
    """Full-batch training of `net` on `data` under the given loss.

    init is either "fresh" (He-uniform from cfg.seed) or an MlpParams
    instance to warm-start from.
    """
    if data.X.shape[0] == 0:
        raise ValueError("training data is empty")
    if data.X.shape[1] != net.widths[0]:
        raise ValueError(
            f"data has {data.X.shape[1]} features, network expects {net.widths[0]}"
        )
    rng = RngState(cfg.seed)
    init_rng = rng.child(1)
    dropout_rng = rng.child(2)

    if isinstance(init, MlpParams):
        params = init.copy()
    elif init == "fresh":
        params = he_uniform_init(net, init_rng)
    else:
        raise ValueError("init must be 'fresh' or MlpParams")

    state = AdamState.zeros_like(params)
    losses_hist = []
    window = cfg.convergence_window
    windowed_means = []
    best_windowed = np.inf
    best_params = params
    bad_epochs = 0

    for epoch in range(cfg.max_epochs):
        outputs, cache = forward(params, data.X, train_rng=dropout_rng, dropout_rate=cfg.dropout_rate)
        residuals = data.Y - outputs
        ev = batch_loss_and_grad(residuals, loss)
        losses_hist.append(ev.value)

        if not np.isfinite(ev.value):
            bad_epochs += 1
            if bad_epochs >= 10:
                raise DivergenceError(
                    f"loss non-finite for {bad_epochs} consecutive epochs",
                    np.asarray(losses_hist),
                )
        else:
            bad_epochs = 0

        if np.isfinite(ev.value):
            grads = backward(params, cache, -ev.grad_residuals)
            params, state = adam_step(params, grads, state, cfg)

        if len(losses_hist) >= window:
            wm = float(np.mean(losses_hist[-window:]))
            windowed_means.append(wm)
            if wm < best_windowed:
                best_windowed = wm
                best_params = params.copy()
            if (
                epoch + 1 >= cfg.min_epochs
                and len(windowed_means) > window
                and np.isfinite(wm)
            ):
                ref = windowed_means[-1 - window]
                if abs(wm - ref) < cfg.convergence_tol * max(abs(ref), 1e-12):
                    break

    model = best_params if windowed_means else params
    shift = 0.0
    if isinstance(loss, EML):
        model, shift = recenter_intercept(model, data, use_median=cfg.recenter_by_median)
    return TrainReport(
        model=model,
        loss_history=np.asarray(losses_hist),
        epochs_run=len(losses_hist),
        recentering_shift=shift,
    )


def fine_tune(base, data, loss, net, cfg, learning_rate=3e-5):
    """Warm-start training from `base` at the fine-tuning learning rate."""
    ft_cfg = replace(cfg, learning_rate=learning_rate)
    return train(data, loss, net, ft_cfg, init=base)


def save_checkpoint(model, net, path):
    """Write the model as JSON; floats serialize as round-trippable decimals."""
    doc = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "widths": list(net.widths),
        "activation": net.activation,
        "weights": [w.flatten().tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path, expected_widths=None):
    """Read a checkpoint; returns (MlpParams, MlpConfig).

    Raises CheckpointError naming the offending field on malformed input,
    or on a width mismatch against expected_widths.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from exc

    for key in ("format_version", "widths", "activation", "weights", "biases"):
        if key not in doc:
            raise CheckpointError(f"checkpoint missing field {key!r}")
    if doc["format_version"] != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"unsupported format_version {doc['format_version']!r}")
    widths = tuple(doc["widths"])
    if expected_widths is not None and widths != tuple(expected_widths):
        raise CheckpointError(
            f"checkpoint widths {widths} do not match expected {tuple(expected_widths)}"
        )
    try:
        net = MlpConfig(widths=widths, activation=doc["activation"])
    except ValueError as exc:
        raise CheckpointError(f"invalid field: {exc}") from exc

    n_layers = len(widths) - 1
    if len(doc["weights"]) != n_layers or len(doc["biases"]) != n_layers:
        raise CheckpointError("field 'weights'/'biases': layer count mismatch")
    weights, biases = [], []
    for layer in range(n_layers):
        fan_in, fan_out = widths[layer], widths[layer + 1]
        w = np.asarray(doc["weights"][layer], dtype=np.float64)
        b = np.asarray(doc["biases"][layer], dtype=np.float64)
        if w.size != fan_in * fan_out:
            raise CheckpointError(
                f"field 'weights'[{layer}]: expected {fan_in * fan_out} values, got {w.size}"
            )
        if b.size != fan_out:
            raise CheckpointError(
                f"field 'biases'[{layer}]: expected {fan_out} values, got {b.size}"
            )
        weights.append(w.reshape(fan_in, fan_out))
        biases.append(b)
    return MlpParams(weights=weights, biases=biases), net
