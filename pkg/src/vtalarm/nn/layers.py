"""Differentiable layers with explicit forward/backward passes.

Every layer caches what its backward pass needs during forward and
exposes parameters and gradients as name->array dicts. Gradients follow
the standard chain-rule derivations; each one is pinned by the central
finite-difference suite in the tests.
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    BatchTooSmall,
    DimensionNotDivisible,
    LabelOutOfRange,
    ShapeMismatch,
)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Numerically stable softmax; invariant to per-row constant shifts."""
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Stable branch form: never exponentiates a positive argument."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class Layer:
    """Base layer: parameter-free identity."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.state: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        super().__init__()
        self.in_dim, self.out_dim = in_dim, out_dim
        self.params = {
            "W": rng.normal(0.0, np.sqrt(2.0 / in_dim), size=(out_dim, in_dim)),
            "b": np.zeros(out_dim),
        }

    def forward(self, x, train):
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeMismatch(f"Dense expects (B, {self.in_dim}), got {x.shape}")
        self._x = x
        return x @ self.params["W"].T + self.params["b"]

    def backward(self, dout):
        self.grads = {"W": dout.T @ self._x, "b": dout.sum(axis=0)}
        return dout @ self.params["W"]


class ReLU(Layer):
    def forward(self, x, train):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout):
        return dout * self._mask


class Conv1D(Layer):
    """Same-padded 1D cross-correlation over time, (B, T, C) -> (B, T, K)."""

    def __init__(self, in_channels: int, n_filters: int, filter_size: int, rng):
        super().__init__()
        if filter_size % 2 != 1:
            raise ShapeMismatch("filter_size must be odd for symmetric same padding")
        self.c, self.k, self.f = in_channels, n_filters, filter_size
        fan_in = filter_size * in_channels
        self.params = {
            "W": rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(n_filters, filter_size, in_channels)),
            "b": np.zeros(n_filters),
        }

    def forward(self, x, train):
        if x.ndim != 3 or x.shape[2] != self.c:
            raise ShapeMismatch(f"Conv1D expects (B, T, {self.c}), got {x.shape}")
        b, t, _ = x.shape
        pad = (self.f - 1) // 2
        x_pad = np.zeros((b, t + 2 * pad, self.c))
        x_pad[:, pad : pad + t, :] = x
        self._x_pad, self._t = x_pad, t
        out = np.tile(self.params["b"], (b, t, 1))
        w = self.params["W"]
        for f in range(self.f):
            out += x_pad[:, f : f + t, :] @ w[:, f, :].T
        return out

    def backward(self, dout):
        t, pad = self._t, (self.f - 1) // 2
        w = self.params["W"]
        dw = np.empty_like(w)
        dx_pad = np.zeros_like(self._x_pad)
        for f in range(self.f):
            dw[:, f, :] = np.einsum("btk,btc->kc", dout, self._x_pad[:, f : f + t, :])
            dx_pad[:, f : f + t, :] += dout @ w[:, f, :]
        self.grads = {"W": dw, "b": dout.sum(axis=(0, 1))}
        return dx_pad[:, pad : pad + t, :]


class BatchNorm(Layer):
    """Normalize the trailing feature axis over all leading axes.

    Train mode uses batch statistics (population variance) and updates
    running stats with momentum 0.9; inference uses the running stats.
    """

    def __init__(self, n_features: int, momentum: float = 0.9, eps: float = 1e-5):
        super().__init__()
        self.n_features = n_features
        self.momentum, self.eps = momentum, eps
        self.params = {"gamma": np.ones(n_features), "beta": np.zeros(n_features)}
        self.state = {
            "running_mean": np.zeros(n_features),
            "running_var": np.ones(n_features),
        }

    def forward(self, x, train):
        if x.shape[-1] != self.n_features:
            raise ShapeMismatch(f"BatchNorm expects trailing dim {self.n_features}, got {x.shape}")
        axes = tuple(range(x.ndim - 1))
        if train:
            m = int(np.prod([x.shape[a] for a in axes]))
            if m < 2:
                raise BatchTooSmall("train-mode batchnorm needs >= 2 elements per feature")
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            self.state["running_mean"] = (
                self.momentum * self.state["running_mean"] + (1 - self.momentum) * mean
            )
            self.state["running_var"] = (
                self.momentum * self.state["running_var"] + (1 - self.momentum) * var
            )
        else:
            mean, var = self.state["running_mean"], self.state["running_var"]
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        if train:
            self._cache = (xhat, inv_std, axes, m)
        return self.params["gamma"] * xhat + self.params["beta"]

    def backward(self, dout):
        xhat, inv_std, axes, _ = self._cache
        self.grads = {
            "gamma": (dout * xhat).sum(axis=axes),
            "beta": dout.sum(axis=axes),
        }
        mean_dout = dout.mean(axis=axes)
        mean_dout_xhat = (dout * xhat).mean(axis=axes)
        return (self.params["gamma"] * inv_std) * (dout - mean_dout - xhat * mean_dout_xhat)


class MaxPool1D(Layer):
    """Non-overlapping windows of 2 over time; an odd tail sample is dropped.

    Backward routes the gradient to the argmax; ties go to the earlier index.
    """

    def forward(self, x, train):
        if x.ndim != 3 or x.shape[1] < 2:
            raise ShapeMismatch(f"MaxPool1D expects (B, T>=2, K), got {x.shape}")
        b, t, k = x.shape
        t2 = t // 2
        view = x[:, : 2 * t2, :].reshape(b, t2, 2, k)
        self._argmax = view.argmax(axis=2)  # first max wins on ties
        self._in_shape = x.shape
        return np.take_along_axis(view, self._argmax[:, :, None, :], axis=2)[:, :, 0, :]

    def backward(self, dout):
        b, t, k = self._in_shape
        t2 = t // 2
        dview = np.zeros((b, t2, 2, k))
        np.put_along_axis(dview, self._argmax[:, :, None, :], dout[:, :, None, :], axis=2)
        dx = np.zeros((b, t, k))
        dx[:, : 2 * t2, :] = dview.reshape(b, 2 * t2, k)
        return dx


class MultiHeadAttention(Layer):
    """Self-attention: per head softmax(Q K^T / sqrt(d_k)) V, heads
    concatenated and projected back to the model dimension. Projections
    are bias-free; no masking."""

    def __init__(self, model_dim: int, n_heads: int, rng):
        super().__init__()
        if model_dim % n_heads != 0:
            raise DimensionNotDivisible(f"model_dim {model_dim} not divisible by {n_heads} heads")
        self.model_dim, self.n_heads = model_dim, n_heads
        self.d_k = model_dim // n_heads
        std = np.sqrt(2.0 / model_dim)
        self.params = {
            name: rng.normal(0.0, std, size=(model_dim, model_dim))
            for name in ("Wq", "Wk", "Wv", "Wo")
        }

    def _split(self, x):
        b, t, _ = x.shape
        return x.reshape(b, t, self.n_heads, self.d_k).transpose(0, 2, 1, 3)

    def _merge(self, x):
        b, h, t, d = x.shape
        return x.transpose(0, 2, 1, 3).reshape(b, t, h * d)

    def forward(self, x, train):
        if x.ndim != 3 or x.shape[2] != self.model_dim:
            raise ShapeMismatch(f"attention expects (B, T, {self.model_dim}), got {x.shape}")
        p = self.params
        q = self._split(x @ p["Wq"])
        k = self._split(x @ p["Wk"])
        v = self._split(x @ p["Wv"])
        scores = q @ k.swapaxes(-1, -2) / np.sqrt(self.d_k)
        attn = softmax(scores, axis=-1)
        heads = attn @ v
        merged = self._merge(heads)
        self._cache = (x, q, k, v, attn, merged)
        return merged @ p["Wo"]

    def attention_weights(self, x):
        """Per-head attention matrices for inspection, (B, H, T, T)."""
        q = self._split(x @ self.params["Wq"])
        k = self._split(x @ self.params["Wk"])
        return softmax(q @ k.swapaxes(-1, -2) / np.sqrt(self.d_k), axis=-1)

    def backward(self, dout):
        x, q, k, v, attn, merged = self._cache
        p = self.params
        d_wo = np.einsum("bti,btj->ij", merged, dout)
        d_merged = dout @ p["Wo"].T
        d_heads = self._split(d_merged)

        d_attn = d_heads @ v.swapaxes(-1, -2)
        d_v = attn.swapaxes(-1, -2) @ d_heads
        # softmax backward, rowwise over the key axis
        d_scores = attn * (d_attn - (d_attn * attn).sum(axis=-1, keepdims=True))
        d_scores /= np.sqrt(self.d_k)
        d_q = d_scores @ k
        d_k_ = d_scores.swapaxes(-1, -2) @ q

        dq_full, dk_full, dv_full = (self._merge(g) for g in (d_q, d_k_, d_v))
        self.grads = {
            "Wq": np.einsum("bti,btj->ij", x, dq_full),
            "Wk": np.einsum("bti,btj->ij", x, dk_full),
            "Wv": np.einsum("bti,btj->ij", x, dv_full),
            "Wo": d_wo,
        }
        return dq_full @ p["Wq"].T + dk_full @ p["Wk"].T + dv_full @ p["Wv"].T


class GlobalAvgPool(Layer):
    """Mean over the time axis, (B, T, K) -> (B, K)."""

    def forward(self, x, train):
        if x.ndim != 3:
            raise ShapeMismatch(f"GlobalAvgPool expects (B, T, K), got {x.shape}")
        self._t = x.shape[1]
        return x.mean(axis=1)

    def backward(self, dout):
        return np.repeat(dout[:, None, :] / self._t, self._t, axis=1)


class Dropout(Layer):
    """Inverted dropout: train-time zeroing with 1/(1-p) survivor scaling."""

    def __init__(self, p: float, rng: np.random.Generator | None = None):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise ShapeMismatch(f"dropout probability must be in [0, 1), got {p}")
        self.p = p
        self.rng = rng

    def forward(self, x, train):
        if not train or self.p == 0.0:
            self._mask = None
            return x
        self._mask = (self.rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * self._mask

    def backward(self, dout):
        return dout if self._mask is None else dout * self._mask


def dropout(x: np.ndarray, p: float, train: bool, rng) -> np.ndarray:
    """Functional inverted dropout; ``rng`` is a Generator or an int seed."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.Generator(np.random.PCG64(rng))
    layer = Dropout(p, rng)
    return layer.forward(np.asarray(x, dtype=np.float64), train)


def weighted_bce_with_logits(
    logits: np.ndarray, labels: np.ndarray, weights: np.ndarray | None = None
) -> tuple[float, np.ndarray]:
    """Weighted binary cross-entropy through a stable sigmoid.

    Probabilities are clamped to [1e-7, 1 - 1e-7] inside the log; the
    returned gradient w.r.t. the logits is w * (p - y) / sum(w).
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if not np.all((labels == 0) | (labels == 1)):
        raise LabelOutOfRange("labels must be 0 or 1")
    y = labels.astype(np.float64)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != y.shape or logits.shape != y.shape:
        raise ShapeMismatch("logits, labels and weights must share one shape")
    p = sigmoid(logits)
    pc = np.clip(p, 1e-7, 1.0 - 1e-7)
    sw = w.sum()
    loss = -np.sum(w * (y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))) / sw
    dlogits = w * (p - y) / sw
    return float(loss), dlogits


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    state: dict,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One in-place Adam update with bias correction.

    ``state`` carries "m", "v" (moment arrays) and "t" (step count);
    an empty dict is initialized on first use.
    """
    if param.shape != grad.shape:
        raise ShapeMismatch(f"param {param.shape} vs grad {grad.shape}")
    if not state:
        state["m"] = np.zeros_like(param)
        state["v"] = np.zeros_like(param)
        state["t"] = 0
    state["t"] += 1
    state["m"] = beta1 * state["m"] + (1 - beta1) * grad
    state["v"] = beta2 * state["v"] + (1 - beta2) * grad * grad
    m_hat = state["m"] / (1 - beta1 ** state["t"])
    v_hat = state["v"] / (1 - beta2 ** state["t"])
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


class Adam:
    """Adam over a model's named parameters, one state slot per tensor."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.states: dict[str, dict] = {}

    def step(self, named_params: list[tuple[str, np.ndarray, np.ndarray]]) -> None:
        for name, param, grad in named_params:
            state = self.states.setdefault(name, {})
            adam_step(param, grad, state, self.lr, self.beta1, self.beta2, self.eps)


__all__ = [
    "softmax",
    "sigmoid",
    "Layer",
    "Dense",
    "ReLU",
    "Conv1D",
    "BatchNorm",
    "MaxPool1D",
    "MultiHeadAttention",
    "GlobalAvgPool",
    "Dropout",
    "dropout",
    "weighted_bce_with_logits",
    "adam_step",
    "Adam",
]
