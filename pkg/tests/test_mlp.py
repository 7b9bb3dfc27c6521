"""Network plumbing: forward oracles, gradients, determinism, model files."""

import math

import numpy as np
import pytest

from qipf.mlp import (Layer, MlpModel, ModelFormatError, TrainConfig,
                      TrainingError, dropout_forward, forward_capture,
                      init_mlp, load_model, loss_gradients, predict_batch,
                      save_model, train, validate_model)


def tiny_fixed_model(output_mode="regression"):
    """2-4-2 net with hand-set weights for closed-form forward checks."""
    w0 = np.array([[1.0, -1.0], [0.5, 0.5], [-2.0, 0.0], [0.0, 1.0]])
    b0 = np.array([0.0, -0.25, 1.0, 0.0])
    w1 = np.array([[1.0, 2.0, -1.0, 0.5], [0.0, -1.0, 0.0, 3.0]])
    b1 = np.array([0.1, -0.2])
    return MlpModel([Layer(w0, b0, "relu"), Layer(w1, b1, "identity")],
                    output_mode)


def test_init_shapes_activations_and_bounds():
    model = init_mlp([3, 5, 4, 2], seed=1)
    shapes = [(l.weight.shape, l.bias.shape) for l in model.layers]
    assert shapes == [((5, 3), (5,)), ((4, 5), (4,)), ((2, 4), (2,))]
    assert [l.activation for l in model.layers] == ["relu", "relu",
                                                    "identity"]
    for l, fan_in in zip(model.layers, (3, 5, 4)):
        assert np.all(np.abs(l.weight) <= math.sqrt(6.0 / fan_in))
        assert np.all(l.bias == 0.0)


def test_init_is_seed_deterministic():
    a = init_mlp([2, 6, 1], seed=9)
    b = init_mlp([2, 6, 1], seed=9)
    c = init_mlp([2, 6, 1], seed=10)
    for la, lb in zip(a.layers, b.layers):
        np.testing.assert_array_equal(la.weight, lb.weight)
    assert not np.array_equal(a.layers[0].weight, c.layers[0].weight)


def test_init_validation():
    with pytest.raises(ValueError):
        init_mlp([4])
    with pytest.raises(ValueError):
        init_mlp([4, 0, 2])
    with pytest.raises(ValueError):
        init_mlp([4, 3, 2], output_mode="ranking")


def test_forward_capture_hand_computed():
    model = tiny_fixed_model()
    x = np.array([1.0, 2.0])
    pre0 = model.layers[0].weight @ x + model.layers[0].bias
    post0 = np.maximum(pre0, 0.0)
    pre1 = model.layers[1].weight @ post0 + model.layers[1].bias
    out, trace = forward_capture(model, x)
    np.testing.assert_array_equal(out, pre1)
    assert len(trace.hidden) == 1
    np.testing.assert_array_equal(trace.hidden[0], post0)
    np.testing.assert_array_equal(trace.last_pre, pre1)


def test_forward_capture_classification_softmax():
    model = tiny_fixed_model("classification")
    out, trace = forward_capture(model, [0.3, -0.7])
    assert out.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(out > 0.0)
    shifted = trace.last_pre - trace.last_pre.max()
    want = np.exp(shifted) / np.exp(shifted).sum()
    np.testing.assert_allclose(out, want, rtol=1e-15)


def test_forward_counter_and_input_checks():
    model = tiny_fixed_model()
    assert model.forward_count == 0
    forward_capture(model, [0.0, 0.0])
    forward_capture(model, [1.0, 1.0])
    assert model.forward_count == 2
    with pytest.raises(ValueError):
        forward_capture(model, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        forward_capture(model, [[1.0, 2.0]])


def test_predict_batch_matches_stacked_forwards():
    model = init_mlp([3, 8, 2], seed=2)
    xs = np.random.default_rng(0).normal(size=(7, 3))
    singles = np.stack([forward_capture(model, x)[0] for x in xs])
    before = model.forward_count
    batch = predict_batch(model, xs)
    assert model.forward_count == before + 7
    np.testing.assert_allclose(batch, singles, rtol=1e-12)


def test_gradient_check_regression():
    rng = np.random.default_rng(11)
    model = init_mlp([2, 4, 3], seed=11)
    xs = rng.normal(size=(12, 2))
    ys = rng.normal(size=(12, 3))
    _assert_gradients_match(model, xs, ys)


def test_gradient_check_classification():
    rng = np.random.default_rng(12)
    model = init_mlp([2, 4, 3], output_mode="classification", seed=12)
    xs = rng.normal(size=(12, 2))
    ys = rng.integers(0, 3, size=12)
    _assert_gradients_match(model, xs, ys)


def _assert_gradients_match(model, xs, ys, h=1e-6, tol=1e-4):
    # seeds keep every relu pre-activation away from the kink at 0, so the
    # central difference is trustworthy at step h
    loss0, grads = loss_gradients(model, xs, ys)
    assert math.isfinite(loss0)
    worst = 0.0
    for li, layer in enumerate(model.layers):
        for arr, g in ((layer.weight, grads[li][0]),
                       (layer.bias, grads[li][1])):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                keep = arr[idx]
                arr[idx] = keep + h
                lp, _ = loss_gradients(model, xs, ys)
                arr[idx] = keep - h
                lm, _ = loss_gradients(model, xs, ys)
                arr[idx] = keep
                fd = (lp - lm) / (2.0 * h)
                denom = max(abs(fd), abs(g[idx]), 1e-8)
                worst = max(worst, abs(fd - g[idx]) / denom)
    assert worst <= tol


def test_loss_gradients_leaves_counter_alone():
    model = tiny_fixed_model()
    loss_gradients(model, np.zeros((3, 2)), np.zeros((3, 2)))
    assert model.forward_count == 0


def test_train_is_bit_deterministic_and_pure():
    rng = np.random.default_rng(3)
    xs = rng.normal(size=(24, 2))
    ys = (xs[:, :1] - xs[:, 1:]) ** 2
    model = init_mlp([2, 6, 1], seed=3)
    w_before = model.layers[0].weight.copy()
    cfg = TrainConfig(epochs=40, batch_size=8, learning_rate=1e-2,
                      dropout_rate=0.1, seed=7)
    m1, h1 = train(model, xs, ys, cfg)
    m2, h2 = train(model, xs, ys, cfg)
    assert h1 == h2
    for a, b in zip(m1.layers, m2.layers):
        np.testing.assert_array_equal(a.weight, b.weight)
        np.testing.assert_array_equal(a.bias, b.bias)
    # the input model is untouched
    np.testing.assert_array_equal(model.layers[0].weight, w_before)
    # a different shuffle/dropout seed changes the result
    m3, _ = train(model, xs, ys, TrainConfig(epochs=40, batch_size=8,
                                             learning_rate=1e-2,
                                             dropout_rate=0.1, seed=8))
    assert not np.array_equal(m1.layers[0].weight, m3.layers[0].weight)


def test_train_reduces_loss_both_objectives():
    rng = np.random.default_rng(4)
    xs = rng.normal(size=(40, 1))
    ys = 0.5 * xs
    _, hist = train(init_mlp([1, 8, 1], seed=4), xs, ys,
                    TrainConfig(epochs=150, learning_rate=1e-2))
    assert hist[-1] < 0.1 * hist[0]

    labels = (xs[:, 0] > 0).astype(int)
    _, hist = train(init_mlp([1, 8, 2], "classification", seed=4), xs, labels,
                    TrainConfig(epochs=150, learning_rate=1e-2))
    assert hist[-1] < 0.5 * hist[0]


def test_train_raises_on_divergence():
    # inputs near the float ceiling overflow the squared error immediately
    xs = np.full((4, 1), 1e200)
    ys = np.zeros((4, 1))
    with pytest.raises(TrainingError):
        train(init_mlp([1, 2, 1], seed=0), xs, ys, TrainConfig(epochs=2))


def test_train_input_validation():
    xs = np.zeros((6, 2))
    ys = np.zeros((6, 1))
    model = init_mlp([2, 3, 1], seed=0)
    with pytest.raises(ValueError):
        train(model, xs, ys, TrainConfig(epochs=0))
    with pytest.raises(ValueError):
        train(model, xs, ys, TrainConfig(epochs=2, dropout_rate=1.0))
    with pytest.raises(ValueError):
        train(model, xs, ys, TrainConfig(epochs=2, batch_size=-1))
    with pytest.raises(ValueError):
        train(model, xs, np.zeros((6, 3)), TrainConfig(epochs=2))
    with pytest.raises(ValueError):
        train(model, np.zeros((0, 2)), ys, TrainConfig(epochs=2))
    cls = init_mlp([2, 3, 4], "classification", seed=0)
    with pytest.raises(ValueError):
        train(cls, xs, np.full(6, 9), TrainConfig(epochs=2))


def test_dropout_rate_zero_equals_deterministic_pass():
    model = tiny_fixed_model()
    x = np.array([0.4, -1.2])
    out, _ = forward_capture(model, x)
    got = dropout_forward(model, x, 0.0, np.random.default_rng(0))
    np.testing.assert_array_equal(got, out)


def test_dropout_is_rng_driven_and_validated():
    model = init_mlp([2, 16, 1], seed=5)
    x = np.array([1.0, -1.0])
    a = dropout_forward(model, x, 0.4, np.random.default_rng(3))
    b = dropout_forward(model, x, 0.4, np.random.default_rng(3))
    c = dropout_forward(model, x, 0.4, np.random.default_rng(4))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        dropout_forward(model, x, 1.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        dropout_forward(model, x, -0.1, np.random.default_rng(0))


def test_model_json_round_trip_is_parameter_exact(tmp_path):
    model = init_mlp([3, 7, 4, 2], "classification", seed=6)
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    assert back.output_mode == model.output_mode
    for a, b in zip(model.layers, back.layers):
        assert a.activation == b.activation
        np.testing.assert_array_equal(a.weight, b.weight)
        np.testing.assert_array_equal(a.bias, b.bias)
    x = np.array([0.2, -0.4, 1.0])
    np.testing.assert_array_equal(forward_capture(model, x)[0],
                                  forward_capture(back, x)[0])


def test_load_model_rejects_malformed_files(tmp_path):
    path = tmp_path / "model.json"
    path.write_text("not json")
    with pytest.raises(ModelFormatError):
        load_model(path)
    path.write_text("[1, 2]")
    with pytest.raises(ModelFormatError):
        load_model(path)
    path.write_text('{"format_version": 99, "output_mode": "regression",'
                    ' "layers": []}')
    with pytest.raises(ModelFormatError):
        load_model(path)
    path.write_text('{"format_version": 1, "output_mode": "regression",'
                    ' "layers": [{"activation": "tanh",'
                    ' "weight": [[1.0]], "bias": [0.0]}]}')
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_validate_model_catches_broken_chains():
    good = init_mlp([2, 3, 1], seed=0)
    validate_model(good)
    bad = MlpModel([Layer(np.ones((3, 2)), np.zeros(3), "relu"),
                    Layer(np.ones((1, 4)), np.zeros(1), "identity")])
    with pytest.raises(ValueError):
        validate_model(bad)
    with pytest.raises(ValueError):
        validate_model(MlpModel([]))
    nonfinite = MlpModel([Layer(np.array([[np.nan]]), np.zeros(1),
                                "identity")])
    with pytest.raises(ValueError):
        validate_model(nonfinite)
