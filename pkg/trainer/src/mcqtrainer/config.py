"""Training configuration and the reference hyperparameter grid."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict


class ConfigError(ValueError):
    pass


GRID_RANKS = (32, 64)
GRID_ALPHAS = (16, 32)
GRID_DROPOUTS = (0.05, 0.1, 0.15)
GRID_LR_MIN, GRID_LR_MAX = 5e-5, 2e-4
GRID_EPOCHS = (3, 5)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 3
    learning_rate: float = 2e-4
    lora_rank: int = 64
    lora_alpha: int = 16
    lora_dropout: float = 0.1
    batch_size: int = 4
    grad_accum_steps: int = 4
    quantize_4bit: bool = False
    base_model_id: str = "tiny-random"
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.lora_rank < 1:
            raise ConfigError("lora_rank must be >= 1")
        if self.lora_alpha < 1:
            raise ConfigError("lora_alpha must be >= 1")
        if not 0.0 <= self.lora_dropout < 1.0:
            raise ConfigError("lora_dropout must be in [0, 1)")
        if self.batch_size < 1 or self.grad_accum_steps < 1:
            raise ConfigError("batch_size and grad_accum_steps must be >= 1")

    def validate_for_grid(self) -> None:
        self.validate()
        if not GRID_EPOCHS[0] <= self.epochs <= GRID_EPOCHS[1]:
            raise ConfigError(f"grid epochs must be in {GRID_EPOCHS}")
        if not GRID_LR_MIN <= self.learning_rate <= GRID_LR_MAX:
            raise ConfigError(f"grid learning_rate must be in [{GRID_LR_MIN}, {GRID_LR_MAX}]")
        if self.lora_rank not in GRID_RANKS:
            raise ConfigError(f"grid lora_rank must be one of {GRID_RANKS}")
        if self.lora_alpha not in GRID_ALPHAS:
            raise ConfigError(f"grid lora_alpha must be one of {GRID_ALPHAS}")
        if self.lora_dropout not in GRID_DROPOUTS:
            raise ConfigError(f"grid lora_dropout must be one of {GRID_DROPOUTS}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        return cls(**data)


# The six tuning configurations evaluated when selecting the final
# recipe, as (epochs, learning_rate, rank, dropout, alpha).
REFERENCE_GRID_ROWS: tuple[tuple[int, float, int, float, int], ...] = (
    (4, 5e-5, 64, 0.15, 16),
    (5, 1.2e-4, 64, 0.05, 16),
    (3, 5e-5, 64, 0.05, 16),
    (4, 5e-5, 64, 0.10, 16),
    (5, 1e-4, 32, 0.05, 32),
    (3, 2e-4, 64, 0.05, 16),
)

# The configuration used for the final training run.
FINAL_CONFIG = TrainConfig(
    epochs=3, learning_rate=2e-4, lora_rank=64, lora_dropout=0.1, lora_alpha=16
)


def reference_grid(**overrides) -> list[TrainConfig]:
    """The six reference configurations as TrainConfigs; every one
    satisfies the grid invariants."""
    configs = []
    for epochs, lr, rank, dropout, alpha in REFERENCE_GRID_ROWS:
        cfg = TrainConfig(
            epochs=epochs,
            learning_rate=lr,
            lora_rank=rank,
            lora_dropout=dropout,
            lora_alpha=alpha,
            **overrides,
        )
        cfg.validate_for_grid()
        configs.append(cfg)
    return configs


@dataclass(frozen=True)
class GridResult:
    config: TrainConfig
    dev_accuracy_pct: float
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "dev_accuracy_pct": self.dev_accuracy_pct,
            "error": self.error,
        }
