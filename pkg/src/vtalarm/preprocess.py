"""Window imputation, min-max scaling and dataset splitting.

The scaler is always fit on training rows only and then applied to
validation/test rows; values outside the fitted range are clamped so the
output stays inside [0, 1]. Splits are stratified by label and fully
determined by the seed (PCG64, see :mod:`vtalarm.rng`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyInput, TooFewSamples
from .rng import STREAM_SPLIT, derive_rng
from .wfdb_io import AlarmWindow


@dataclass
class ScalerParams:
    """Per-feature training minima and maxima."""

    minimum: np.ndarray
    maximum: np.ndarray


@dataclass
class DatasetSplit:
    train_indices: np.ndarray
    val_indices: np.ndarray
    test_indices: np.ndarray
    seed: int


def impute_mean(window: AlarmWindow) -> AlarmWindow:
    """Replace masked samples with their channel's mean over unmasked ones.

    A channel with every sample missing is filled with 0. The returned
    window has an all-false mask; the input is left untouched.
    """
    samples = window.samples.copy()
    mask = window.missing_mask
    for c in range(samples.shape[1]):
        col_mask = mask[:, c]
        if not col_mask.any():
            continue
        good = samples[~col_mask, c]
        fill = good.mean() if good.size else 0.0
        samples[col_mask, c] = fill
    return replace(
        window, samples=samples, missing_mask=np.zeros_like(mask, dtype=bool)
    )


def fit_scaler(features: np.ndarray) -> ScalerParams:
    """Columnwise min/max over the given (training) rows."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1:
        raise EmptyInput("fit_scaler needs at least one row")
    return ScalerParams(minimum=features.min(axis=0), maximum=features.max(axis=0))


def apply_scaler(features: np.ndarray, params: ScalerParams) -> np.ndarray:
    """Map each column to [0, 1] via the fitted range, clamping outliers.

    Constant columns (max == min) map to 0.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape[-1] != params.minimum.shape[0]:
        raise DimensionMismatch(
            f"got {features.shape[-1]} features, scaler has {params.minimum.shape[0]}"
        )
    span = params.maximum - params.minimum
    safe_span = np.where(span > 0, span, 1.0)
    scaled = (features - params.minimum) / safe_span
    scaled = np.where(span > 0, scaled, 0.0)
    return np.clip(scaled, 0.0, 1.0)


def save_scaler(path: str | Path, params: ScalerParams, comment: str | None = None) -> None:
    """Persist scaler params as a small versioned key-value file."""
    lines = ([f"# {comment}"] if comment else []) + [
        "scaler_version=1",
        f"n_features={params.minimum.shape[0]}",
        "min=" + ",".join(repr(float(v)) for v in params.minimum),
        "max=" + ",".join(repr(float(v)) for v in params.maximum),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_scaler(path: str | Path) -> ScalerParams:
    fields = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line and not line.startswith("#"):
            key, value = line.split("=", 1)
            fields[key] = value
    if fields.get("scaler_version") != "1":
        raise DimensionMismatch(f"unknown scaler version {fields.get('scaler_version')!r}")
    minimum = np.array([float(v) for v in fields["min"].split(",")])
    maximum = np.array([float(v) for v in fields["max"].split(",")])
    if minimum.shape[0] != int(fields["n_features"]):
        raise DimensionMismatch("scaler file is inconsistent")
    return ScalerParams(minimum=minimum, maximum=maximum)


def split_dataset(
    labels: np.ndarray, seed: int, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
) -> DatasetSplit:
    """Deterministic stratified 80/10/10 split.

    Validation and test each get ``floor(ratio * n)`` samples overall,
    the remainder goes to training. Per class, val/test quotas are
    proportional with largest-remainder rounding, so every split's class
    ratio matches the full set within one sample per class.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if n < 10:
        raise TooFewSamples(f"need at least 10 samples to split, got {n}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios}")

    rng = derive_rng(seed, STREAM_SPLIT)
    n_val_total = int(np.floor(ratios[1] * n))
    n_test_total = int(np.floor(ratios[2] * n))

    classes = np.unique(labels)
    per_class = {c: rng.permutation(np.flatnonzero(labels == c)) for c in classes}

    def allocate(total: int) -> dict:
        quotas = {c: total * per_class[c].size / n for c in classes}
        counts = {c: int(np.floor(quotas[c])) for c in classes}
        short = total - sum(counts.values())
        # Largest fractional remainder first; ties go to the smaller class id.
        order = sorted(classes, key=lambda c: (-(quotas[c] - counts[c]), c))
        for c in order[:short]:
            counts[c] += 1
        return counts

    val_counts = allocate(n_val_total)
    test_counts = allocate(n_test_total)

    val_parts, test_parts, train_parts = [], [], []
    for c in classes:
        idx = per_class[c]
        nv, nt = val_counts[c], test_counts[c]
        val_parts.append(idx[:nv])
        test_parts.append(idx[nv : nv + nt])
        train_parts.append(idx[nv + nt :])

    return DatasetSplit(
        train_indices=np.sort(np.concatenate(train_parts)),
        val_indices=np.sort(np.concatenate(val_parts)),
        test_indices=np.sort(np.concatenate(test_parts)),
        seed=int(seed),
    )


def save_split(path: str | Path, split: DatasetSplit, extra: dict | None = None) -> None:
    """Persist a split as JSON so later stages reuse the same partition."""
    payload = dict(extra or {})
    payload.update(
        {
            "seed": split.seed,
            "train": [int(i) for i in split.train_indices],
            "val": [int(i) for i in split.val_indices],
            "test": [int(i) for i in split.test_indices],
        }
    )
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def load_split(path: str | Path) -> DatasetSplit:
    """Load a split file; also accepts externally authored benchmark splits."""
    payload = json.loads(Path(path).read_text())
    try:
        split = DatasetSplit(
            train_indices=np.asarray(payload["train"], dtype=np.int64),
            val_indices=np.asarray(payload["val"], dtype=np.int64),
            test_indices=np.asarray(payload["test"], dtype=np.int64),
            seed=int(payload.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"split file {path} is missing train/val/test lists") from exc
    combined = np.concatenate([split.train_indices, split.val_indices, split.test_indices])
    if len(np.unique(combined)) != combined.size:
        raise DimensionMismatch(f"split file {path} assigns some index twice")
    return split


__all__ = [
    "ScalerParams",
    "DatasetSplit",
    "impute_mean",
    "fit_scaler",
    "apply_scaler",
    "save_scaler",
    "load_scaler",
    "split_dataset",
    "save_split",
    "load_split",
]
