from .config import ModelConfig, desk_preset, paper_preset
from .network import (
    ForwardOutput,
    LossParts,
    Suggestion,
    TokenPrediction,
    backward,
    char_encode,
    expected_shapes,
    forward,
    forward_batch,
    init_params,
    loss,
    loss_and_grads,
    param_census,
    predict,
    predict_tokens,
)
from .checkpoint import (
    Checkpoint,
    CheckpointError,
    load_checkpoint,
    model_digest,
    save_checkpoint,
)

__all__ = [
    "ModelConfig", "desk_preset", "paper_preset",
    "ForwardOutput", "LossParts", "Suggestion", "TokenPrediction",
    "backward", "char_encode", "expected_shapes", "forward", "forward_batch",
    "init_params", "loss", "loss_and_grads", "param_census", "predict",
    "predict_tokens",
    "Checkpoint", "CheckpointError", "load_checkpoint", "model_digest",
    "save_checkpoint",
]
