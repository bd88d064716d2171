"""Model and training configuration, presets and JSON round-tripping."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from ..exceptions import EstimationError
from ..perception.encoder import PerceptionConfig

__all__ = ["ModelConfig", "TrainConfig", "model_preset", "load_train_config", "save_train_config"]


@dataclass(frozen=True)
class ModelConfig:
    """Velocity-model and perception shapes plus channel dimensions."""

    n_rx: int = 4
    n_tx: int = 4
    n_subcarriers: int = 64
    d_model: int = 64
    depth: int = 3
    num_heads: int = 4
    patch: tuple = (2, 2, 8)
    angle_delay_mode: str = "tx-delay"
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)

    def __post_init__(self):
        if self.perception.d_model != self.d_model:
            object.__setattr__(
                self, "perception", dataclasses.replace(self.perception, d_model=self.d_model)
            )

    @property
    def tensor_dims(self):
        return (self.n_rx, self.n_tx, 2 * self.n_subcarriers)

    @property
    def channel_dims(self):
        return (self.n_rx, self.n_tx, self.n_subcarriers)


def model_preset(name):
    """Named model sizes: "toy" trains on a desktop CPU, "full" mirrors
    the large configuration (D=384, depth 6, heads 6)."""
    if name == "toy":
        return ModelConfig()
    if name == "full":
        return ModelConfig(d_model=384, depth=6, num_heads=6)
    raise EstimationError(f"unknown model preset {name!r} (expected 'toy' or 'full')")


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters and data bindings."""

    dataset: str = ""
    out_dir: str = "runs/default"
    preset: str = "toy"
    model: ModelConfig = field(default_factory=ModelConfig)
    epochs: int = 8
    batch_size: int = 16
    lr_max: float = 2e-4
    lr_min: float = 1e-6
    weight_decay: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    p_drop: float = 0.1
    spacings: tuple = (2, 4, 8)
    snr_range: tuple = (-10.0, 30.0)
    seed: int = 0
    log_interval: int = 50
    checkpoint_interval: int = 0  # steps; 0 = final checkpoint only

    def __post_init__(self):
        if not (0.0 <= self.p_drop <= 1.0):
            raise EstimationError("p_drop must lie in [0, 1]")
        if self.batch_size < 1 or self.epochs < 0:
            raise EstimationError("batch_size must be >= 1 and epochs >= 0")


def _to_plain(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _to_plain(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def train_config_to_dict(cfg):
    return _to_plain(cfg)


def train_config_from_dict(raw):
    raw = dict(raw)
    model_raw = raw.pop("model", None)
    preset = raw.get("preset", "toy")
    model = model_preset(preset)
    if model_raw:
        perception_raw = model_raw.pop("perception", None)
        fields = {f.name for f in dataclasses.fields(ModelConfig)}
        overrides = {k: tuple(v) if isinstance(v, list) else v for k, v in model_raw.items() if k in fields}
        if perception_raw:
            pfields = {f.name for f in dataclasses.fields(PerceptionConfig)}
            pov = {k: tuple(v) if isinstance(v, list) else v for k, v in perception_raw.items() if k in pfields}
            overrides["perception"] = dataclasses.replace(model.perception, **pov)
        model = dataclasses.replace(model, **overrides)
    fields = {f.name for f in dataclasses.fields(TrainConfig)}
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in raw.items() if k in fields}
    unknown = set(raw) - fields
    if unknown:
        raise EstimationError(f"unknown train config keys: {sorted(unknown)}")
    return TrainConfig(model=model, **clean)


def load_train_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return train_config_from_dict(json.load(fh))


def save_train_config(path, cfg):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(train_config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
