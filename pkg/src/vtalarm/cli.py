"""Command-line pipeline: synth, ingest, featurize, train, evaluate, predict.

Configuration comes from a JSON file plus flag overrides (flags win).
Every run resolves to one canonical config whose SHA-256 prefix is
stamped, with the seed, into each text output's header comment and each
JSON output's fields, so artifacts can be traced to the exact settings
that produced them. Identical config and seed reproduce every output
byte for byte.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, MissingInput, VtalarmError
from .evaluate import classification_metrics, decide_alert
from .features import build_feature_vector, feature_names, morlet_scales, spectral_params_for
from .imbalance import ResampleConfig, class_weights, resample
from .nn.checkpoint import load_checkpoint, save_checkpoint
from .nn.model import CNN_DEFAULTS, build_model
from .nn.training import TrainConfig, train, write_history
from .preprocess import (
    apply_scaler,
    fit_scaler,
    impute_mean,
    load_scaler,
    load_split,
    save_scaler,
    save_split,
    split_dataset,
)
from .synth import SynthConfig, generate_corpus
from .wfdb_io import AlarmWindow, extract_alarm_window, load_record, read_alarm_index

DEFAULT_CONFIG = {
    "seed": 0,
    "data_dir": None,
    "out_dir": ".",
    "architecture": "fcnn",
    "threshold": 0.5,
    "synth": {"n_events": 100, "class_ratio": 0.3, "fs": 50.0, "separability": 2.0},
    "spectral": {"segment_seconds": 4.0, "overlap": 0.5},
    "wavelet": {"f_min": 0.5, "f_max": 40.0, "n_scales": 24, "omega0": 6.0},
    "features": {"coherence_mode": "per_pair", "analysis_span": None},
    "split": {"ratios": [0.8, 0.1, 0.1], "file": None},
    "resample": {"method": "none", "ratio": 1.0, "k_neighbors": 5},
    "train": {
        "learning_rate": 1e-3,
        "batch_size": 32,
        "max_epochs": 100,
        "patience": 10,
        "use_class_weights": False,
    },
    "model": {"fcnn": {}, "cnn": {}},
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    """Deep-merge ``override`` into ``base``; unknown keys are rejected."""
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and key != "model":
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be a mapping")
            out[key] = _merge(base[key], value, where)
        elif key == "model":
            if not isinstance(value, dict) or not set(value) <= {"fcnn", "cnn"}:
                raise ConfigError("config key 'model' must map fcnn/cnn to hyperparameters")
            out[key] = {k: dict(base[key].get(k, {}), **value.get(k, {})) for k in ("fcnn", "cnn")}
        else:
            out[key] = value
    return out


def resolve_config(config_path: str | None, overrides: dict | None = None) -> dict:
    """defaults <- config file <- flag overrides."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise MissingInput(f"config file {path} does not exist")
        try:
            loaded = json.loads(path.read_text())
        except ValueError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        config = _merge(config, loaded)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        node = config
        *parents, leaf = dotted.split(".")
        for part in parents:
            node = node[part]
        node[leaf] = value
    return config


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _stamp(config: dict) -> str:
    return f"config={config_hash(config)} seed={config['seed']}"


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise MissingInput(f"{path} not found; {hint}")
    return path


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------- features csv


def _write_features_csv(path, record_ids, labels, matrix, names, comment):
    lines = [f"# {comment}", ",".join(["record_id", "label"] + list(names))]
    for rid, y, row in zip(record_ids, labels, matrix):
        lines.append(",".join([rid, str(int(y))] + [repr(float(v)) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def _load_features_csv(path):
    rows = [line for line in Path(path).read_text().splitlines() if line and not line.startswith("#")]
    header = rows[0].split(",")
    if header[:2] != ["record_id", "label"]:
        raise ConfigError(f"{path} is not a feature table (header {header[:2]})")
    names = header[2:]
    record_ids, labels, data = [], [], []
    for line in rows[1:]:
        parts = line.split(",")
        record_ids.append(parts[0])
        labels.append(int(parts[1]))
        data.append([float(v) for v in parts[2:]])
    return record_ids, np.asarray(labels, dtype=np.int64), np.asarray(data, dtype=np.float64), names


def _load_windows(data_dir: Path):
    windows = np.load(_require(data_dir / "windows.npy", "run ingest first"))
    labels = np.load(_require(data_dir / "labels.npy", "run ingest first"))
    meta = json.loads(_require(data_dir / "meta.json", "run ingest first").read_text())
    return windows, labels.astype(np.int64), meta


# ------------------------------------------------------------------- commands


def cmd_synth(config: dict, out_dir: Path) -> None:
    s = config["synth"]
    try:
        synth_config = SynthConfig(
            n_events=int(s["n_events"]),
            class_ratio=float(s["class_ratio"]),
            fs=float(s["fs"]),
            separability=float(s["separability"]),
            seed=int(config["seed"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad synth settings: {exc}") from exc
    events = generate_corpus(synth_config, out_dir)
    n_true = sum(label for _, _, label in events)
    print(
        f"synth: wrote {len(events)} records ({n_true} true / {len(events) - n_true} false) "
        f"to {out_dir} [{_stamp(config)}]"
    )


def cmd_ingest(config: dict, data_dir: Path, out_dir: Path) -> None:
    events = read_alarm_index(_require(Path(data_dir) / "alarms.csv", "synth or supply an alarm index"))
    windows, labels, record_ids = [], [], []
    fs = None
    for record_id, alarm_time, label in events:
        record = load_record(data_dir, record_id, verify_checksums=True)
        if fs is None:
            fs = record.header.sampling_frequency
        elif record.header.sampling_frequency != fs:
            raise ConfigError(f"{record_id} samples at {record.header.sampling_frequency} Hz, corpus at {fs} Hz")
        window = impute_mean(extract_alarm_window(record, alarm_time, label))
        windows.append(window.samples.astype(np.float32))
        labels.append(label)
        record_ids.append(record_id)
    stack = np.stack(windows)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.save(out_dir / "windows.npy", stack)
    np.save(out_dir / "labels.npy", np.asarray(labels, dtype=np.int64))
    _write_json(
        out_dir / "meta.json",
        {
            "config_hash": config_hash(config),
            "seed": config["seed"],
            "record_ids": record_ids,
            "fs": fs,
            "alarm_index": int(round(300.0 * fs)),
            "n_windows": int(stack.shape[0]),
            "window_samples": int(stack.shape[1]),
            "n_channels": int(stack.shape[2]),
            "dtype": "float32",
            "imputed": True,
        },
    )
    print(f"ingest: {stack.shape[0]} windows of {stack.shape[1]}x{stack.shape[2]} -> {out_dir} [{_stamp(config)}]")


def cmd_featurize(config: dict, data_dir: Path, out_dir: Path) -> None:
    windows, labels, meta = _load_windows(Path(data_dir))
    fs = float(meta["fs"])
    spectral = spectral_params_for(
        fs, seconds=float(config["spectral"]["segment_seconds"]), overlap=float(config["spectral"]["overlap"])
    )
    w = config["wavelet"]
    wavelet = morlet_scales(
        fs, f_min=float(w["f_min"]), f_max=float(w["f_max"]), n_scales=int(w["n_scales"]), omega0=float(w["omega0"])
    )
    mode = config["features"]["coherence_mode"]
    span = config["features"]["analysis_span"]
    span = None if span is None else (float(span[0]), float(span[1]))

    matrix = []
    for i in range(windows.shape[0]):
        window = AlarmWindow(
            record_id=meta["record_ids"][i],
            samples=windows[i].astype(np.float64),
            missing_mask=np.zeros(windows[i].shape, dtype=bool),
            label=int(labels[i]),
            alarm_index=int(meta["alarm_index"]),
            fs=fs,
        )
        matrix.append(build_feature_vector(window, spectral, wavelet, coherence_mode=mode, analysis_span=span).values)
    names = feature_names(windows.shape[2], coherence_mode=mode)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_features_csv(out_dir / "features.csv", meta["record_ids"], labels, np.asarray(matrix), names, _stamp(config))
    print(f"featurize: {len(matrix)} x {len(names)} feature matrix -> {out_dir / 'features.csv'} [{_stamp(config)}]")


def _get_split(config: dict, labels: np.ndarray):
    if config["split"]["file"]:
        return load_split(_require(Path(config["split"]["file"]), "split file from config"))
    ratios = tuple(float(r) for r in config["split"]["ratios"])
    return split_dataset(labels, seed=int(config["seed"]), ratios=ratios)


def _resample_config(config: dict) -> ResampleConfig:
    r = config["resample"]
    try:
        return ResampleConfig(
            method=r["method"], ratio=float(r["ratio"]), k_neighbors=int(r["k_neighbors"]), seed=int(config["seed"])
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad resample settings: {exc}") from exc


def _prepare_arrays(config: dict, data_dir: Path, arch: str, hyperparams: dict, scaler=None):
    """Load + scale model inputs. Returns (record_ids, labels, x, scaler).

    fcnn consumes the feature table; cnn consumes raw windows, decimated
    by the architecture's stride and min-max scaled per channel. When
    ``scaler`` is None it is fit later by the caller on training rows.
    """
    data_dir = Path(data_dir)
    if arch == "fcnn":
        ids, labels, x, _ = _load_features_csv(_require(data_dir / "features.csv", "run featurize first"))
        return ids, labels, x, None
    windows, labels, meta = _load_windows(data_dir)
    decimation = int(hyperparams.get("decimation", CNN_DEFAULTS["decimation"]))
    x = windows[:, ::decimation, :].astype(np.float64)
    return meta["record_ids"], labels, x, None


def _scale(x: np.ndarray, scaler) -> np.ndarray:
    if x.ndim == 2:
        return apply_scaler(x, scaler)
    n, t, c = x.shape
    return apply_scaler(x.reshape(n * t, c), scaler).reshape(n, t, c)


def cmd_train(config: dict, data_dir: Path, out_dir: Path) -> None:
    arch = config["architecture"]
    if arch not in ("fcnn", "cnn"):
        raise ConfigError(f"architecture must be fcnn or cnn, got {arch!r}")
    seed = int(config["seed"])
    hyperparams = dict(config["model"][arch])
    rcfg = _resample_config(config)
    use_weights = bool(config["train"]["use_class_weights"])
    if use_weights and rcfg.method != "none":
        raise ConfigError("class weights and resampling are mutually exclusive; pick one")
    ids, labels, x, _ = _prepare_arrays(config, data_dir, arch, hyperparams)
    split = _get_split(config, labels)
    if split.train_indices.size and int(max(np.max(split.train_indices), np.max(split.val_indices), np.max(split.test_indices))) >= x.shape[0]:
        raise ConfigError("split file indices exceed the dataset size")

    train_rows = x[split.train_indices]
    scaler = fit_scaler(train_rows.reshape(-1, x.shape[-1]) if x.ndim == 3 else train_rows)
    xs = _scale(x, scaler)

    x_train, y_train = xs[split.train_indices], labels[split.train_indices]
    if rcfg.method != "none":
        flat = x_train.reshape(x_train.shape[0], -1)
        flat, y_train = resample(flat, y_train, rcfg)
        x_train = flat.reshape((flat.shape[0],) + xs.shape[1:])

    t = config["train"]
    train_config = TrainConfig(
        learning_rate=float(t["learning_rate"]),
        batch_size=int(t["batch_size"]),
        max_epochs=int(t["max_epochs"]),
        patience=int(t["patience"]),
        seed=seed,
        class_weights=class_weights(y_train) if use_weights else None,
    )
    model = build_model(arch, xs.shape[1:], seed=seed, hyperparams=hyperparams)
    history = train(model, x_train, y_train, xs[split.val_indices], labels[split.val_indices], train_config)

    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, out_dir / "model.ckpt")
    write_history(out_dir / "history.csv", history, comment=_stamp(config))
    save_scaler(out_dir / "scaler.txt", scaler, comment=_stamp(config))
    save_split(out_dir / "split.json", split, extra={"config_hash": config_hash(config)})
    best = max(row["val_auc"] for row in history)
    print(
        f"train: {arch} for {len(history)} epochs on {x_train.shape[0]} rows, "
        f"best val auc {best:.4f} -> {out_dir / 'model.ckpt'} [{_stamp(config)}]"
    )


def _scored_rows(config: dict, model_dir: Path, data_dir: Path):
    """Shared by evaluate/predict: load model + data, return scored rows."""
    model = load_checkpoint(_require(Path(model_dir) / "model.ckpt", "run train first"))
    scaler = load_scaler(_require(Path(model_dir) / "scaler.txt", "run train first"))
    ids, labels, x, _ = _prepare_arrays(config, data_dir, model.architecture, model.hyperparams)
    scores = model.predict(_scale(x, scaler))
    return model, ids, labels, scores


def _subset_indices(which: str, model_dir: Path, n: int) -> np.ndarray:
    if which == "all":
        return np.arange(n)
    split = load_split(_require(Path(model_dir) / "split.json", "run train first"))
    idx = {"train": split.train_indices, "val": split.val_indices, "test": split.test_indices}[which]
    if idx.size == 0:
        raise ConfigError(f"split has no {which} rows")
    if int(idx.max()) >= n:
        raise ConfigError(f"split {which} indices exceed the dataset ({n} rows)")
    return idx


def _write_scores_csv(path: Path, comment: str, record_ids, scores, threshold: float) -> None:
    lines = [f"# {comment}", "record_id,score,alert"]
    for rid, score in zip(record_ids, scores):
        decision = decide_alert(float(score), threshold)
        lines.append(f"{rid},{repr(decision.score)},{'true' if decision.alert else 'false'}")
    path.write_text("\n".join(lines) + "\n")


def cmd_evaluate(config: dict, model_dir: Path, data_dir: Path, out_dir: Path, subset: str = "test") -> None:
    threshold = float(config["threshold"])
    model, ids, labels, scores = _scored_rows(config, model_dir, data_dir)
    idx = _subset_indices(subset, model_dir, len(ids))
    report = classification_metrics(scores[idx], labels[idx], threshold)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"config_hash": config_hash(config), "seed": config["seed"], "subset": subset, **report.to_dict()}
    _write_json(out_dir / "report.json", payload)
    _write_scores_csv(out_dir / "scores.csv", _stamp(config), [ids[i] for i in idx], scores[idx], threshold)
    print(
        f"evaluate: {model.architecture} on {len(idx)} {subset} rows, auc {report.roc_auc:.4f} "
        f"-> {out_dir / 'report.json'} [{_stamp(config)}]"
    )


def cmd_predict(config: dict, model_dir: Path, data_dir: Path, out_dir: Path) -> None:
    threshold = float(config["threshold"])
    model, ids, _, scores = _scored_rows(config, model_dir, data_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_scores_csv(out_dir / "predictions.csv", _stamp(config), ids, scores, threshold)
    n_alerts = int(np.sum(scores >= threshold))
    print(
        f"predict: {model.architecture} scored {len(ids)} events, {n_alerts} alerts at "
        f"threshold {threshold} -> {out_dir / 'predictions.csv'} [{_stamp(config)}]"
    )


# ------------------------------------------------------------------ arguments


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--seed", type=int, help="master seed for every derived random stream")
    common.add_argument("--resample", choices=["smote", "adasyn", "none"], help="training-set oversampling method")
    common.add_argument("--ratio", type=float, help="target minority/majority ratio for oversampling")
    common.add_argument("--k", type=int, help="neighbor count for smote/adasyn")
    common.add_argument("--arch", choices=["fcnn", "cnn"], help="model architecture")
    common.add_argument("--threshold", type=float, help="alert probability threshold")
    common.add_argument("--class-weights", action="store_true", default=None, help="weight the loss by inverse class frequency")
    common.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(prog="vtalarm", description="Alarm classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--n-events", type=int, help="number of alarm events")
    p.add_argument("--class-ratio", type=float, help="fraction of true alarms")
    p.add_argument("--fs", type=float, help="sampling frequency in Hz")
    p.add_argument("--separability", type=float, help="class separation strength")

    p = sub.add_parser("ingest", parents=[common], help="extract alarm windows from records")
    p.add_argument("data_dir", nargs="?", help="directory of .hea/.dat files plus alarms.csv")

    p = sub.add_parser("featurize", parents=[common], help="compute the feature matrix")
    p.add_argument("data_dir", nargs="?", help="directory produced by ingest")

    p = sub.add_parser("train", parents=[common], help="fit a model")
    p.add_argument("data_dir", nargs="?", help="featurize output (fcnn) or ingest output (cnn)")

    p = sub.add_parser("evaluate", parents=[common], help="score a trained model")
    p.add_argument("model_dir", help="directory produced by train")
    p.add_argument("data_dir", nargs="?", help="feature/window directory to score")
    p.add_argument("--split", choices=["train", "val", "test", "all"], default="test", help="rows to evaluate")

    p = sub.add_parser("predict", parents=[common], help="emit alert decisions")
    p.add_argument("model_dir", help="directory produced by train")
    p.add_argument("data_dir", nargs="?", help="feature/window directory to score")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    mapping = {
        "seed": args.seed,
        "architecture": args.arch,
        "threshold": args.threshold,
        "resample.method": args.resample,
        "resample.ratio": args.ratio,
        "resample.k_neighbors": args.k,
        "train.use_class_weights": args.class_weights,
        "synth.n_events": getattr(args, "n_events", None),
        "synth.class_ratio": getattr(args, "class_ratio", None),
        "synth.fs": getattr(args, "fs", None),
        "synth.separability": getattr(args, "separability", None),
    }
    return {k: v for k, v in mapping.items() if v is not None}


def _data_dir(args: argparse.Namespace, config: dict) -> Path:
    chosen = getattr(args, "data_dir", None) or config["data_dir"]
    if chosen is None:
        raise ConfigError("no data directory: pass it as an argument or set data_dir in the config")
    return Path(chosen)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = resolve_config(args.config, _overrides(args))
        out_dir = Path(args.out if args.out is not None else config["out_dir"])
        if args.command == "synth":
            out_dir.mkdir(parents=True, exist_ok=True)
            cmd_synth(config, out_dir)
        elif args.command == "ingest":
            cmd_ingest(config, _data_dir(args, config), out_dir)
        elif args.command == "featurize":
            cmd_featurize(config, _data_dir(args, config), out_dir)
        elif args.command == "train":
            cmd_train(config, _data_dir(args, config), out_dir)
        elif args.command == "evaluate":
            cmd_evaluate(config, Path(args.model_dir), _data_dir(args, config), out_dir, subset=args.split)
        elif args.command == "predict":
            cmd_predict(config, Path(args.model_dir), _data_dir(args, config), out_dir)
    except VtalarmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: MissingInput: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
