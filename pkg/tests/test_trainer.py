import numpy as np
import pytest

from emlreg import (
    EML,
    LS,
    AdamState,
    Dataset,
    Fixed,
    MlpConfig,
    MlpParams,
    RngState,
    TrainConfig,
    adam_step,
    fine_tune,
    forward,
    he_uniform_init,
    load_checkpoint,
    recenter_intercept,
    save_checkpoint,
    train,
)
from emlreg.trainer import CheckpointError, DivergenceError


def scalar_params(value):
    return MlpParams(weights=[np.array([[value]])], biases=[np.array([0.0])])


def scalar_grads(g):
    return MlpParams(weights=[np.array([[g]])], biases=[np.array([0.0])])


def reference_adam(theta, grads, lr=0.1, b1=0.9, b2=0.99, eps=1e-8):
    """Independent scalar Adam for golden values."""
    m = v = 0.0
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta -= lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
    return theta


CFG_LR01 = TrainConfig(learning_rate=0.1, min_epochs=0, max_epochs=0)


def test_adam_single_step_golden():
    params = scalar_params(0.0)
    state = AdamState.zeros_like(params)
    new, state = adam_step(params, scalar_grads(1.0), state, CFG_LR01)
    expect = -0.1 / (1.0 + 1e-8)
    assert new.weights[0][0, 0] == pytest.approx(expect, abs=1e-12)
    assert state.t == 1


def test_adam_two_step_golden():
    params = scalar_params(0.0)
    state = AdamState.zeros_like(params)
    for _ in range(2):
        params, state = adam_step(params, scalar_grads(1.0), state, CFG_LR01)
    assert params.weights[0][0, 0] == pytest.approx(reference_adam(0.0, [1.0, 1.0]), abs=1e-12)


def test_adam_zero_grad_no_move():
    params = scalar_params(0.7)
    new, _ = adam_step(params, scalar_grads(0.0), AdamState.zeros_like(params), CFG_LR01)
    assert new.weights[0][0, 0] == 0.7


def test_adam_shape_mismatch():
    params = scalar_params(0.0)
    bad = MlpParams(weights=[np.zeros((2, 1))], biases=[np.zeros(1)])
    with pytest.raises(ValueError, match="shape"):
        adam_step(params, bad, AdamState.zeros_like(params), CFG_LR01)


def linear_dataset(n=64, d=2, seed=0, noiseless=True):
    rng = RngState(seed)
    X = rng.uniform01(n * d).reshape(n, d)
    w = np.array([0.5, -0.3])[:d]
    Y = X @ w + 0.2
    return Dataset(X=X, Y=Y)


def test_train_convex_ls():
    data = linear_dataset()
    net = MlpConfig(widths=(2, 1))
    cfg = TrainConfig(min_epochs=0, max_epochs=3000, dropout_rate=0.0, seed=1)
    report = train(data, LS(), net, cfg)
    preds, _ = forward(report.model, data.X)
    assert float(np.mean((data.Y - preds) ** 2)) < 1e-6


def test_train_determinism():
    data = linear_dataset(n=32)
    net = MlpConfig(widths=(2, 4, 1))
    cfg = TrainConfig(min_epochs=0, max_epochs=50, seed=3)
    r1 = train(data, LS(), net, cfg)
    r2 = train(data, LS(), net, cfg)
    assert np.array_equal(r1.loss_history, r2.loss_history)
    for a, b in zip(r1.model.weights, r2.model.weights):
        assert np.array_equal(a, b)


def test_train_zero_epochs_returns_warm_model():
    data = linear_dataset(n=16)
    net = MlpConfig(widths=(2, 4, 1))
    warm = he_uniform_init(net, RngState(8))
    cfg = TrainConfig(min_epochs=0, max_epochs=0, seed=0)
    report = train(data, LS(), net, cfg, init=warm)
    assert report.epochs_run == 0
    for a, b in zip(report.model.weights, warm.weights):
        assert np.array_equal(a, b)


def test_train_feature_mismatch():
    data = linear_dataset(n=16)
    with pytest.raises(ValueError, match="features"):
        train(data, LS(), MlpConfig(widths=(5, 1)), TrainConfig(min_epochs=0, max_epochs=0))


def test_eml_training_recenters_residual_mean():
    data = linear_dataset(n=32)
    net = MlpConfig(widths=(2, 8, 1))
    cfg = TrainConfig(min_epochs=0, max_epochs=100, dropout_rate=0.0, seed=2)
    report = train(data, EML(Fixed(0.5)), net, cfg)
    preds, _ = forward(report.model, data.X)
    assert abs(float(np.mean(data.Y - preds))) < 1e-10


def test_recenter_intercept():
    net = MlpConfig(widths=(2, 1))
    zero = MlpParams(weights=[np.zeros((2, 1))], biases=[np.zeros(1)])
    data = Dataset(X=np.zeros((3, 2)), Y=np.array([1.0, 2.0, 3.0]))
    shifted, shift = recenter_intercept(zero, data)
    assert shift == 2.0
    again, shift2 = recenter_intercept(shifted, data)
    assert abs(shift2) < 1e-12


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning", "ignore:invalid value:RuntimeWarning")
def test_divergence_guard():
    data = linear_dataset(n=16)
    net = MlpConfig(widths=(2, 4, 1))
    # Absurd learning rate overflows the forward pass immediately.
    cfg = TrainConfig(learning_rate=1e200, min_epochs=0, max_epochs=500, dropout_rate=0.0, seed=0)
    with pytest.raises(DivergenceError) as exc_info:
        train(data, LS(), net, cfg)
    assert len(exc_info.value.loss_history) >= 10


def test_fine_tune_zero_epochs_and_no_regression():
    data = linear_dataset()
    net = MlpConfig(widths=(2, 1))
    cfg = TrainConfig(min_epochs=0, max_epochs=2000, dropout_rate=0.0, seed=1)
    base_report = train(data, LS(), net, cfg)

    frozen = fine_tune(base_report.model, data, LS(), net,
                       TrainConfig(min_epochs=0, max_epochs=0, dropout_rate=0.0))
    for a, b in zip(frozen.model.weights, base_report.model.weights):
        assert np.array_equal(a, b)

    tuned = fine_tune(base_report.model, data, LS(), net, cfg)
    assert tuned.epochs_run <= cfg.max_epochs

    def eval_loss(model):
        preds, _ = forward(model, data.X)
        return float(np.mean((data.Y - preds) ** 2))

    assert eval_loss(tuned.model) <= eval_loss(base_report.model) + 1e-8


def test_checkpoint_roundtrip(tmp_path):
    net = MlpConfig(widths=(3, 4, 1))
    params = he_uniform_init(net, RngState(4))
    path = tmp_path / "model.json"
    save_checkpoint(params, net, path)
    loaded, loaded_net = load_checkpoint(path)
    assert loaded_net.widths == net.widths
    for a, b in zip(loaded.weights + loaded.biases, params.weights + params.biases):
        assert np.array_equal(a, b)


def test_checkpoint_zero_model(tmp_path):
    net = MlpConfig(widths=(2, 1))
    zero = MlpParams(weights=[np.zeros((2, 1))], biases=[np.zeros(1)])
    path = tmp_path / "zero.json"
    save_checkpoint(zero, net, path)
    loaded, _ = load_checkpoint(path)
    assert np.all(loaded.weights[0] == 0.0)


def test_checkpoint_width_mismatch(tmp_path):
    net = MlpConfig(widths=(3, 4, 1))
    save_checkpoint(he_uniform_init(net, RngState(0)), net, tmp_path / "m.json")
    with pytest.raises(CheckpointError, match="widths"):
        load_checkpoint(tmp_path / "m.json", expected_widths=(5, 4, 1))


def test_checkpoint_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format_version": 1, "widths": [2, 1], "activation": "relu"}')
    with pytest.raises(CheckpointError, match="weights"):
        load_checkpoint(path)
    path.write_text("not json at all")
    with pytest.raises(CheckpointError, match="JSON"):
        load_checkpoint(path)
