"""Model assembly: two fixed architectures over the layer library.

"fcnn" consumes flat feature vectors (B, D); "cnn" consumes raw
multichannel windows (B, T, C). Both end in a single logit; predict()
applies the sigmoid. Weights are drawn from a dedicated init stream so
two models built with the same seed are bit-identical.
"""

from __future__ import annotations

import copy

import numpy as np

from ..errors import InvalidHyperparams, ShapeMismatch
from ..rng import STREAM_DROPOUT, STREAM_INIT, derive_rng
from .layers import (
    BatchNorm,
    Conv1D,
    Dense,
    Dropout,
    GlobalAvgPool,
    MaxPool1D,
    MultiHeadAttention,
    ReLU,
    sigmoid,
)

ARCHITECTURES = ("fcnn", "cnn")

FCNN_DEFAULTS = {"hidden_sizes": [256, 192, 128, 64], "dropout_p": 0.3}
CNN_DEFAULTS = {
    "n_filters": 32,
    "filter_size": 7,
    "n_heads": 4,
    "dense_sizes": [256, 128],
    "dropout_p": 0.3,
    "decimation": 4,
}


class Model:
    """A layer stack plus the metadata needed to rebuild it from disk."""

    def __init__(self, architecture: str, input_shape: tuple, hyperparams: dict, layers: list):
        self.architecture = architecture
        self.input_shape = tuple(int(v) for v in input_shape)
        self.hyperparams = hyperparams
        self.layers = layers

    def set_dropout_rng(self, rng: np.random.Generator) -> None:
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.rng = rng

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        """Run the stack; returns one logit per example, shape (B,)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.input_shape:
            raise ShapeMismatch(f"expected input {(-1,) + self.input_shape}, got {x.shape}")
        for layer in self.layers:
            x = layer.forward(x, train)
        return x[:, 0]

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        dout = dlogits[:, None]
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def named_parameters(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, layer in enumerate(self.layers):
            for key in sorted(layer.params):
                out.append((f"layer{i}.{key}", layer.params[key]))
        return out

    def named_gradients(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, layer in enumerate(self.layers):
            for key in sorted(layer.params):
                out.append((f"layer{i}.{key}", layer.grads[key]))
        return out

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        """Parameters plus persistent state (batchnorm running stats)."""
        out = list(self.named_parameters())
        for i, layer in enumerate(self.layers):
            for key in sorted(layer.state):
                out.append((f"layer{i}.state.{key}", layer.state[key]))
        return out

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, target in self.named_arrays():
            if name not in arrays:
                raise ShapeMismatch(f"missing array {name}")
            src = arrays[name]
            if src.shape != target.shape:
                raise ShapeMismatch(f"{name}: expected {target.shape}, got {src.shape}")
            target[...] = src

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.named_arrays()}

    def restore(self, snap: dict[str, np.ndarray]) -> None:
        self.load_arrays(snap)

    def parameter_count(self) -> int:
        return int(sum(arr.size for _, arr in self.named_parameters()))

    def predict(self, x: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Inference-mode probabilities in [0, 1], shape (B,)."""
        x = np.asarray(x, dtype=np.float64)
        scores = np.empty(x.shape[0])
        for start in range(0, x.shape[0], batch_size):
            stop = min(start + batch_size, x.shape[0])
            scores[start:stop] = sigmoid(self.forward(x[start:stop], train=False))
        return scores

    def clone(self) -> "Model":
        return copy.deepcopy(self)


def _fcnn_layers(n_features: int, hp: dict, rng) -> list:
    layers = []
    prev = n_features
    for size in hp["hidden_sizes"]:
        layers += [
            Dense(prev, size, rng),
            BatchNorm(size),
            ReLU(),
            Dropout(hp["dropout_p"]),
        ]
        prev = size
    layers.append(Dense(prev, 1, rng))
    return layers


def _cnn_layers(n_channels: int, hp: dict, rng) -> list:
    k = hp["n_filters"]
    layers = [
        Conv1D(n_channels, k, hp["filter_size"], rng),
        BatchNorm(k),
        ReLU(),
        MaxPool1D(),
        MultiHeadAttention(k, hp["n_heads"], rng),
        GlobalAvgPool(),
    ]
    prev = k
    for size in hp["dense_sizes"]:
        layers += [Dense(prev, size, rng), ReLU(), Dropout(hp["dropout_p"])]
        prev = size
    layers.append(Dense(prev, 1, rng))
    return layers


def build_model(
    architecture: str,
    input_shape: tuple,
    seed: int,
    hyperparams: dict | None = None,
) -> Model:
    """Construct a model with freshly initialized weights.

    ``input_shape`` is per-example: (n_features,) for "fcnn",
    (n_samples, n_channels) for "cnn". Unknown hyperparameter keys and
    out-of-range values are rejected rather than ignored.
    """
    if architecture not in ARCHITECTURES:
        raise InvalidHyperparams(f"unknown architecture {architecture!r}")
    defaults = FCNN_DEFAULTS if architecture == "fcnn" else CNN_DEFAULTS
    hp = dict(defaults)
    for key, value in (hyperparams or {}).items():
        if key not in defaults:
            raise InvalidHyperparams(f"unknown hyperparameter {key!r} for {architecture}")
        hp[key] = value

    if not 0.0 <= hp["dropout_p"] < 1.0:
        raise InvalidHyperparams(f"dropout_p must be in [0, 1), got {hp['dropout_p']}")
    input_shape = tuple(int(v) for v in input_shape)
    rng = derive_rng(seed, STREAM_INIT)

    if architecture == "fcnn":
        if len(input_shape) != 1 or input_shape[0] < 1:
            raise InvalidHyperparams(f"fcnn input shape must be (n_features,), got {input_shape}")
        sizes = hp["hidden_sizes"]
        if not sizes or any(int(s) < 1 for s in sizes):
            raise InvalidHyperparams(f"bad hidden_sizes {sizes}")
        hp["hidden_sizes"] = [int(s) for s in sizes]
        layers = _fcnn_layers(input_shape[0], hp, rng)
    else:
        if len(input_shape) != 2 or min(input_shape) < 1:
            raise InvalidHyperparams(
                f"cnn input shape must be (n_samples, n_channels), got {input_shape}"
            )
        for key in ("n_filters", "filter_size", "n_heads", "decimation"):
            hp[key] = int(hp[key])
            if hp[key] < 1:
                raise InvalidHyperparams(f"{key} must be positive, got {hp[key]}")
        if hp["filter_size"] % 2 != 1:
            raise InvalidHyperparams(f"filter_size must be odd, got {hp['filter_size']}")
        if hp["n_filters"] % hp["n_heads"] != 0:
            raise InvalidHyperparams(
                f"n_filters {hp['n_filters']} not divisible by n_heads {hp['n_heads']}"
            )
        if input_shape[0] < 2 * hp["filter_size"]:
            raise InvalidHyperparams(
                f"window of {input_shape[0]} samples is too short for filter_size "
                f"{hp['filter_size']} plus pooling"
            )
        hp["dense_sizes"] = [int(s) for s in hp["dense_sizes"]]
        layers = _cnn_layers(input_shape[1], hp, rng)

    model = Model(architecture, input_shape, hp, layers)
    model.set_dropout_rng(derive_rng(seed, STREAM_DROPOUT))
    return model


__all__ = ["Model", "build_model", "ARCHITECTURES", "FCNN_DEFAULTS", "CNN_DEFAULTS"]
