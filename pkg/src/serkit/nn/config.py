"""Training hyperparameter bundle shared by the harness and the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ConfigInvalid


@dataclass
class TrainConfig:
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    batch_size: int = 16
    max_epochs: int = 50
    seed: int = 42
    early_stop_patience: int = 10
    dropout_rate: float = 0.3

    def __post_init__(self):
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigInvalid(f"optimizer must be sgd or adam, got {self.optimizer!r}")
        if self.learning_rate <= 0:
            raise ConfigInvalid("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigInvalid("batch_size must be at least 1")
        if self.max_epochs < 0:
            raise ConfigInvalid("max_epochs must be non-negative")
        if self.early_stop_patience < 1:
            raise ConfigInvalid("early_stop_patience must be at least 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigInvalid("dropout_rate must lie in [0, 1)")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigInvalid(f"unknown training options: {sorted(extra)}")
        return cls(**data)
