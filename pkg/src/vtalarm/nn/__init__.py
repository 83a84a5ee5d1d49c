from .checkpoint import deserialize_model, load_checkpoint, save_checkpoint, serialize_model
from .layers import Adam, adam_step, dropout, sigmoid, softmax, weighted_bce_with_logits
from .model import Model, build_model
from .training import TrainConfig, read_history, train, write_history

__all__ = [
    "Adam",
    "Model",
    "TrainConfig",
    "adam_step",
    "build_model",
    "deserialize_model",
    "dropout",
    "load_checkpoint",
    "read_history",
    "save_checkpoint",
    "serialize_model",
    "sigmoid",
    "softmax",
    "train",
    "weighted_bce_with_logits",
    "write_history",
]
