"""Plain fully connected networks with Adam training and dropout.

Everything runs in 64-bit floats with seeded generators, so identical
configurations reproduce bit-exact parameters.  The forward-pass counter on
the model exists for cost accounting: single-pass surrogate methods and
multi-pass stochastic baselines can be compared by counting.
"""

import json
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("relu", "identity")
OUTPUT_MODES = ("regression", "classification")
MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised for malformed model files."""


class TrainingError(RuntimeError):
    """Raised when optimization produces a non-finite loss."""


@dataclass
class Layer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray    # (out,)
    activation: str


@dataclass
class ActivationTrace:
    """Hidden post-activations plus the final pre-activation of one pass."""

    hidden: list
    last_pre: np.ndarray


@dataclass
class MlpModel:
    layers: list
    output_mode: str = "regression"
    forward_count: int = field(default=0, compare=False)


@dataclass
class TrainConfig:
    epochs: int
    batch_size: int = 0  # 0 means full batch
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    dropout_rate: float = 0.0
    seed: int = 0


def _check_layer(layer: Layer, index: int):
    if layer.activation not in ACTIVATIONS:
        raise ValueError(f"layer {index}: unknown activation '{layer.activation}'")
    w, b = layer.weight, layer.bias
    if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
        raise ValueError(f"layer {index}: weight/bias shapes disagree")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
        raise ValueError(f"layer {index}: non-finite parameters")


def validate_model(model: MlpModel):
    if model.output_mode not in OUTPUT_MODES:
        raise ValueError(f"unknown output mode '{model.output_mode}'")
    if not model.layers:
        raise ValueError("model has no layers")
    for i, layer in enumerate(model.layers):
        _check_layer(layer, i)
        if i > 0 and layer.weight.shape[1] != model.layers[i - 1].weight.shape[0]:
            raise ValueError(f"layer {i}: input width does not chain")


def init_mlp(sizes, output_mode="regression", seed=0) -> MlpModel:
    """He-style uniform init: weights on (-l, l) with l = sqrt(6/fan_in),
    biases zero.  Hidden layers are relu, the output layer identity."""
    if output_mode not in OUTPUT_MODES:
        raise ValueError(f"unknown output mode '{output_mode}'")
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError("sizes must list input, hidden..., output widths")
    rng = np.random.default_rng(seed)
    layers = []
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        limit = np.sqrt(6.0 / fan_in)
        weight = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        bias = np.zeros(fan_out)
        act = "identity" if i == len(sizes) - 2 else "relu"
        layers.append(Layer(weight, bias, act))
    return MlpModel(layers, output_mode)


def _activate(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _softmax(z):
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def _check_input(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.layers[0].weight.shape[1]:
        raise ValueError("input length does not match the first layer")
    return x


def forward_capture(model: MlpModel, x):
    """One deterministic pass.  Returns (output, trace) and bumps the
    model's forward counter by one.

    The trace holds every hidden post-activation and the last-layer
    pre-activation; for classification the output is the softmax of the
    latter, for regression the two coincide.
    """
    x = _check_input(model, x)
    hidden = []
    value = x
    for i, layer in enumerate(model.layers):
        pre = layer.weight @ value + layer.bias
        value = _activate(layer.activation, pre)
        if i < len(model.layers) - 1:
            hidden.append(value)
    model.forward_count += 1
    trace = ActivationTrace(hidden, pre)
    output = _softmax(pre) if model.output_mode == "classification" else value
    return output, trace


def dropout_forward(model: MlpModel, x, rate, rng):
    """One stochastic pass with inverted-dropout masks on hidden
    activations.  rate = 0 reduces to the deterministic pass."""
    rate = float(rate)
    if not (0.0 <= rate < 1.0):
        raise ValueError("dropout rate must lie in [0, 1)")
    x = _check_input(model, x)
    value = x
    keep = 1.0 - rate
    for i, layer in enumerate(model.layers):
        pre = layer.weight @ value + layer.bias
        value = _activate(layer.activation, pre)
        if i < len(model.layers) - 1 and rate > 0.0:
            mask = (rng.random(value.shape) >= rate) / keep
            value = value * mask
    model.forward_count += 1
    if model.output_mode == "classification":
        return _softmax(pre)
    return value


def _forward_train(layers, xb, rate, rng):
    """Batched pass keeping caches for backprop.  posts[0] is the input."""
    posts = [xb]
    pres = []
    masks = []
    value = xb
    keep = 1.0 - rate
    for i, layer in enumerate(layers):
        pre = value @ layer.weight.T + layer.bias
        value = _activate(layer.activation, pre)
        if i < len(layers) - 1 and rate > 0.0:
            mask = (rng.random(value.shape) >= rate) / keep
            value = value * mask
            masks.append(mask)
        else:
            masks.append(None)
        pres.append(pre)
        posts.append(value)
    return pres, posts, masks


def _backward(layers, pres, posts, masks, dpre):
    """Backpropagate dpre (loss gradient at the final pre-activation)
    through the cached batch pass.  Returns per-layer (grads_w, grads_b)
    lists; parameters are not touched."""
    grads_w = [None] * len(layers)
    grads_b = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        grads_w[i] = dpre.T @ posts[i]
        grads_b[i] = dpre.sum(axis=0)
        if i > 0:
            dpost = dpre @ layers[i].weight
            if masks[i - 1] is not None:
                dpost = dpost * masks[i - 1]
            if layers[i - 1].activation == "relu":
                dpre = dpost * (pres[i - 1] > 0.0)
            else:
                dpre = dpost
    return grads_w, grads_b


def _loss_and_grad(output_mode, last_pre, targets):
    """Returns (scalar loss, gradient wrt the final pre-activation)."""
    b = last_pre.shape[0]
    if output_mode == "regression":
        diff = last_pre - targets
        loss = float(np.mean(diff * diff))
        grad = 2.0 * diff / diff.size
        return loss, grad
    probs = _softmax(last_pre)
    idx = np.arange(b)
    picked = np.clip(probs[idx, targets], 1e-300, None)
    loss = float(-np.mean(np.log(picked)))
    grad = probs.copy()
    grad[idx, targets] -= 1.0
    return loss, grad / b


def _prepare_targets(output_mode, targets, out_width, n):
    targets = np.asarray(targets)
    if output_mode == "classification":
        labels = targets.reshape(-1).astype(np.int64)
        if labels.shape[0] != n:
            raise ValueError("targets and inputs disagree on length")
        if labels.min() < 0 or labels.max() >= out_width:
            raise ValueError("class labels out of range for the output layer")
        return labels
    targets = targets.astype(np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    if targets.shape != (n, out_width):
        raise ValueError("targets do not match the output layer width")
    return targets


def train(model: MlpModel, inputs, targets, config: TrainConfig):
    """Adam on MSE (regression) or softmax cross-entropy (classification).

    Returns (trained model, per-epoch loss history); the input model is
    left untouched.  Deterministic given config.seed.
    """
    validate_model(model)
    if isinstance(config.epochs, bool) or int(config.epochs) != config.epochs:
        raise ValueError("epochs must be an integer")
    if config.epochs < 1:
        raise ValueError("epochs must be at least 1")
    if not (0.0 <= config.dropout_rate < 1.0):
        raise ValueError("dropout rate must lie in [0, 1)")
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    n = inputs.shape[0]
    if n == 0:
        raise ValueError("empty training set")
    if inputs.shape[1] != model.layers[0].weight.shape[1]:
        raise ValueError("inputs do not match the first layer width")
    out_width = model.layers[-1].weight.shape[0]
    targets = _prepare_targets(model.output_mode, targets, out_width, n)

    layers = [Layer(l.weight.copy(), l.bias.copy(), l.activation)
              for l in model.layers]
    rng = np.random.default_rng(config.seed)
    batch = n if config.batch_size in (0, None) else int(config.batch_size)
    if batch < 1:
        raise ValueError("batch size must be positive (or 0 for full batch)")
    batch = min(batch, n)

    m_w = [np.zeros_like(l.weight) for l in layers]
    v_w = [np.zeros_like(l.weight) for l in layers]
    m_b = [np.zeros_like(l.bias) for l in layers]
    v_b = [np.zeros_like(l.bias) for l in layers]
    step = 0
    history = []
    for epoch in range(config.epochs):
        if batch < n:
            order = rng.permutation(n)
        else:
            order = np.arange(n)
        epoch_loss = 0.0
        seen = 0
        for start in range(0, n, batch):
            pick = order[start:start + batch]
            xb = inputs[pick]
            yb = targets[pick]
            pres, posts, masks = _forward_train(
                layers, xb, config.dropout_rate, rng)
            loss, dpre = _loss_and_grad(model.output_mode, pres[-1], yb)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            epoch_loss += loss * xb.shape[0]
            seen += xb.shape[0]
            step += 1
            grads_w, grads_b = _backward(layers, pres, posts, masks, dpre)
            for i in range(len(layers)):
                for g, p, m_, v_ in ((grads_w[i], layers[i].weight, m_w, v_w),
                                     (grads_b[i], layers[i].bias, m_b, v_b)):
                    m_[i] = config.beta1 * m_[i] + (1.0 - config.beta1) * g
                    v_[i] = config.beta2 * v_[i] + (1.0 - config.beta2) * g * g
                    m_hat = m_[i] / (1.0 - config.beta1 ** step)
                    v_hat = v_[i] / (1.0 - config.beta2 ** step)
                    p -= config.learning_rate * m_hat / (np.sqrt(v_hat)
                                                         + config.epsilon)
        history.append(epoch_loss / seen)
    return MlpModel(layers, model.output_mode), history


def loss_gradients(model: MlpModel, inputs, targets):
    """Full-batch loss and analytic parameter gradients, nothing stepped.

    Runs the same cached forward/backward pair the optimizer uses, with
    dropout off, so the returned gradients can be verified against finite
    differences of the loss.  Returns (loss, [(d_weight, d_bias), ...])
    aligned with model.layers.
    """
    validate_model(model)
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    n = inputs.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    if inputs.shape[1] != model.layers[0].weight.shape[1]:
        raise ValueError("inputs do not match the first layer width")
    out_width = model.layers[-1].weight.shape[0]
    targets = _prepare_targets(model.output_mode, targets, out_width, n)
    pres, posts, masks = _forward_train(model.layers, inputs, 0.0, None)
    loss, dpre = _loss_and_grad(model.output_mode, pres[-1], targets)
    grads_w, grads_b = _backward(model.layers, pres, posts, masks, dpre)
    return loss, list(zip(grads_w, grads_b))


def predict_batch(model: MlpModel, inputs) -> np.ndarray:
    """Deterministic batched outputs; one counter bump per row."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    value = inputs
    for layer in model.layers:
        value = _activate(layer.activation, value @ layer.weight.T + layer.bias)
    model.forward_count += inputs.shape[0]
    if model.output_mode == "classification":
        return _softmax(value)
    return value


def save_model(model: MlpModel, path):
    """JSON with full-precision floats; repr round-trips float64 exactly."""
    validate_model(model)
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "output_mode": model.output_mode,
        "layers": [
            {
                "activation": layer.activation,
                "weight": [[float(v) for v in row] for row in layer.weight],
                "bias": [float(v) for v in layer.bias],
            }
            for layer in model.layers
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_model(path) -> MlpModel:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not a valid model file: {exc}") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError("model file must hold a JSON object")
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError("missing or unsupported format_version")
    try:
        layers = [
            Layer(
                weight=np.asarray(entry["weight"], dtype=np.float64),
                bias=np.asarray(entry["bias"], dtype=np.float64),
                activation=entry["activation"],
            )
            for entry in payload["layers"]
        ]
        model = MlpModel(layers, payload["output_mode"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model payload: {exc}") from exc
    try:
        validate_model(model)
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from exc
    return model
