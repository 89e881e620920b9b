"""mcqforge-trainer: toy-scale LoRA/QLoRA fine-tuning companion."""

from .config import ConfigError, GridResult, TrainConfig, reference_grid
from .training import train
from .predicting import predict
from .grid import grid_search

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "GridResult",
    "TrainConfig",
    "grid_search",
    "predict",
    "reference_grid",
    "train",
    "__version__",
]
