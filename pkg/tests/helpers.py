"""Shared oracles and finite-difference machinery for the test suite.

Everything here is deliberately naive: direct DFT sums, O(n^2) pair
counting, elementwise central differences. The implementations under
test must agree with these, not the other way around.
"""

from __future__ import annotations

import numpy as np

from vtalarm.features import SpectralParams, _segment_starts, _taper


def welch_psd_oracle(x: np.ndarray, params: SpectralParams) -> np.ndarray:
    """Welch PSD via an explicit DFT matrix instead of an FFT."""
    x = np.asarray(x, dtype=np.float64)
    seg = params.segment_length
    w = _taper(params)
    starts = _segment_starts(x.size, params)
    n_bins = seg // 2 + 1
    k = np.arange(n_bins)[:, None]
    n = np.arange(seg)[None, :]
    dft = np.exp(-2j * np.pi * k * n / seg)
    acc = np.zeros(n_bins)
    for s in starts:
        segment = x[s : s + seg]
        segment = (segment - segment.mean()) * w
        spectrum = dft @ segment
        acc += np.abs(spectrum) ** 2
    power = acc / starts.size / (params.fs * np.sum(w**2))
    power[1:] *= 2.0
    if seg % 2 == 0:
        power[-1] /= 2.0
    return power


def auc_pair_oracle(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mean over all (positive, negative) pairs: win = 1, tie = 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (pos.size * neg.size)


def numeric_input_grad(layer, x: np.ndarray, dout: np.ndarray, train: bool = True, eps: float = 1e-6):
    """Central finite differences of sum(forward(x) * dout) w.r.t. x."""

    def objective(xv):
        return float(np.sum(layer.forward(xv, train) * dout))

    grad = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        xp = x.copy()
        xp[i] += eps
        xm = x.copy()
        xm[i] -= eps
        grad[i] = (objective(xp) - objective(xm)) / (2 * eps)
    return grad


def numeric_param_grads(layer, x: np.ndarray, dout: np.ndarray, train: bool = True, eps: float = 1e-6):
    """Same objective, differentiated w.r.t. each parameter tensor."""

    def objective():
        return float(np.sum(layer.forward(x, train) * dout))

    grads = {}
    for key, param in layer.params.items():
        grad = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            original = param[i]
            param[i] = original + eps
            plus = objective()
            param[i] = original - eps
            minus = objective()
            param[i] = original
            grad[i] = (plus - minus) / (2 * eps)
        grads[key] = grad
    return grads


def max_rel_error(numeric: np.ndarray, analytic: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(numeric))), 1e-8)
    return float(np.max(np.abs(numeric - analytic))) / scale


def check_layer_gradients(layer, x: np.ndarray, rng: np.random.Generator, train: bool = True) -> float:
    """Forward/backward once, then compare every gradient to central FD.

    Returns the worst relative error across the input and all parameters.
    """
    out = layer.forward(x, train)
    dout = rng.normal(size=out.shape)
    dx = layer.backward(dout)
    worst = max_rel_error(numeric_input_grad(layer, x, dout, train), dx)
    numeric = numeric_param_grads(layer, x, dout, train)
    for key, grad in numeric.items():
        worst = max(worst, max_rel_error(grad, layer.grads[key]))
    return worst
