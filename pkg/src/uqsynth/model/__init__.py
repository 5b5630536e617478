from .config import ModelConfig
from .network import SynthesisModel, normalize_view
from .train import TrainResult, mse_loss, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ModelConfig",
    "SynthesisModel",
    "normalize_view",
    "mse_loss",
    "train",
    "TrainResult",
    "save_checkpoint",
    "load_checkpoint",
]
