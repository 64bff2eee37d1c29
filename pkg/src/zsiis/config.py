"""Training hyperparameters and their dict round trip."""

from dataclasses import dataclass, field

from .errors import ConfigError
from .inn import ModelConfig


@dataclass(frozen=True)
class TrainConfig:
    """Optimization recipe; defaults follow the full-scale training setup."""

    learning_rate: float = 3e-5
    batch_size: int = 8
    epochs: int = 50
    crop_size: int = 224
    loss_weights: tuple = (1.0, 10.0, 5.0, 5.0)
    seed: int = 0
    model: ModelConfig = field(default_factory=ModelConfig)
    betas: tuple = (0.9, 0.999)
    weight_decay: float = 0.0
    max_steps: int | None = None
    ra_enabled: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if not isinstance(self.batch_size, int) or self.batch_size <= 0 or self.batch_size % 2:
            raise ConfigError(f"batch_size must be a positive even integer, got {self.batch_size!r}")
        if not isinstance(self.epochs, int) or self.epochs <= 0:
            raise ConfigError(f"epochs must be a positive integer, got {self.epochs!r}")
        if not isinstance(self.crop_size, int) or self.crop_size <= 0 or self.crop_size % 2:
            raise ConfigError(f"crop_size must be a positive even integer, got {self.crop_size!r}")
        if len(self.loss_weights) != 4 or any(w < 0 for w in self.loss_weights):
            raise ConfigError(f"loss_weights must be 4 nonnegative reals, got {self.loss_weights!r}")
        if len(self.betas) != 2 or not all(0.0 <= b < 1.0 for b in self.betas):
            raise ConfigError(f"betas must be two reals in [0,1), got {self.betas!r}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be nonnegative, got {self.weight_decay!r}")
        if self.max_steps is not None and (not isinstance(self.max_steps, int) or self.max_steps <= 0):
            raise ConfigError(f"max_steps must be a positive integer or None, got {self.max_steps!r}")
        if not isinstance(self.ra_enabled, bool):
            raise ConfigError(f"ra_enabled must be a bool, got {self.ra_enabled!r}")
        object.__setattr__(self, "loss_weights", tuple(float(w) for w in self.loss_weights))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "crop_size": self.crop_size,
            "loss_weights": list(self.loss_weights),
            "seed": self.seed,
            "model": {
                "num_blocks": self.model.num_blocks,
                "channels_per_branch": self.model.channels_per_branch,
                "growth": self.model.growth,
                "num_subnet_layers": self.model.num_subnet_layers,
                "clamp_k": self.model.clamp_k,
                "kernel": self.model.kernel,
            },
            "betas": list(self.betas),
            "weight_decay": self.weight_decay,
            "max_steps": self.max_steps,
            "ra_enabled": self.ra_enabled,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        model_d = d.pop("model", {})
        try:
            model = ModelConfig(**model_d)
            return cls(model=model,
                       loss_weights=tuple(d.pop("loss_weights", (1.0, 10.0, 5.0, 5.0))),
                       betas=tuple(d.pop("betas", (0.9, 0.999))),
                       **d)
        except TypeError as exc:
            raise ConfigError(f"bad train config: {exc}") from exc
