from .idx import IdxDataset, load_idx, read_idx, write_idx
from .loop import (
    ProbeRecord,
    ProbeSettings,
    TrainConfig,
    TrainResult,
    WARMUP_METHODS,
    compare_warmups,
    interchangeability,
    method_config,
    train,
)
from .mlp import MlpModel, forward_backward, init_mlp

__all__ = [
    "IdxDataset", "load_idx", "read_idx", "write_idx",
    "ProbeRecord", "ProbeSettings", "TrainConfig", "TrainResult", "WARMUP_METHODS",
    "compare_warmups", "interchangeability", "method_config", "train",
    "MlpModel", "forward_backward", "init_mlp",
]
