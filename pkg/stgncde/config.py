import json
import os
from dataclasses import MISSING, dataclass, field, fields, asdict, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from .errors import ConfigError
from .presets import LR_GRID, WEIGHT_DECAY_GRID

load_dotenv()


class Settings:
    APP_NAME = "stgncde"
    VERSION = "1.0.0"
    DEBUG = os.getenv("STGNCDE_DEBUG", "False").lower() == "true"

    # Logging
    LOG_LEVEL = os.getenv("STGNCDE_LOG_LEVEL", "INFO")
    LOG_DIR = os.getenv("STGNCDE_LOG_DIR", "logs")

    # Run artifacts
    OUTPUT_DIR = Path(os.getenv("STGNCDE_OUTPUT_DIR", "runs"))

    # Gradient worker threads (1 = single-threaded, bitwise reproducible)
    NUM_WORKERS = int(os.getenv("STGNCDE_NUM_WORKERS", "1"))

settings = Settings()


VARIANT_ALIASES = {
    "full": "full",
    "temporal_only": "temporal_only",
    "temporal": "temporal_only",
    "spatial_only": "spatial_only",
    "spatial": "spatial_only",
}

SOLVER_METHODS = ("euler", "rk4")
DATASET_SOURCES = ("synthetic", "csv")


@dataclass
class RunConfig:
    """Flat run configuration; every key may be set from JSON or `--set key=value`"""

    # Data
    dataset: str = "synthetic"
    values_csv: Optional[str] = None
    meta_json: Optional[str] = None
    synthetic_nodes: int = 5
    synthetic_steps: int = 2000
    synthetic_noise: float = 0.05
    missing_rate: float = 0.0

    # Model
    variant: str = "full"
    num_layers: int = 1
    embed_dim: int = 2
    hidden_h: int = 32
    hidden_z: int = 32
    input_len: int = 12
    horizon: int = 12
    output_dim: int = 1

    # Solver
    solver: str = "rk4"
    steps_per_unit: int = 1

    # Optimisation
    epochs: int = 200
    batch_size: int = 64
    lr: float = 1e-3
    weight_decay: float = 1e-3
    decoupled_weight_decay: bool = False
    patience: int = 15
    grad_clip: float = 0.0
    seed: int = 0
    loss_in_original_units: bool = True

    # Execution
    num_workers: int = field(default_factory=lambda: settings.NUM_WORKERS)
    log_wall_time: bool = False
    allow_off_grid: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Raise ConfigError on the first invalid field"""
        if self.dataset not in DATASET_SOURCES:
            raise ConfigError(f"dataset must be one of {DATASET_SOURCES}, got {self.dataset!r}")
        if self.dataset == "csv" and (not self.values_csv or not self.meta_json):
            raise ConfigError("dataset 'csv' requires both values_csv and meta_json")

        if self.variant not in VARIANT_ALIASES:
            raise ConfigError(f"variant must be one of {sorted(set(VARIANT_ALIASES))}, got {self.variant!r}")
        self.variant = VARIANT_ALIASES[self.variant]

        if self.solver not in SOLVER_METHODS:
            raise ConfigError(f"solver must be one of {SOLVER_METHODS}, got {self.solver!r}")

        positive_ints = (
            "synthetic_nodes", "synthetic_steps", "num_layers", "embed_dim", "hidden_h",
            "hidden_z", "input_len", "horizon", "output_dim", "steps_per_unit", "epochs",
            "batch_size", "patience", "num_workers",
        )
        for name in positive_ints:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.input_len < 2:
            raise ConfigError("input_len must be at least 2 (one solver interval)")

        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")

        for name in ("lr", "weight_decay", "synthetic_noise", "grad_clip", "missing_rate"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number, got {value!r}")
            setattr(self, name, float(value))

        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.weight_decay < 0 or self.synthetic_noise < 0 or self.grad_clip < 0:
            raise ConfigError("weight_decay, synthetic_noise and grad_clip must be non-negative")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ConfigError(f"missing_rate must lie in [0, 1), got {self.missing_rate}")

        for name in ("decoupled_weight_decay", "loss_in_original_units", "log_wall_time", "allow_off_grid"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be true or false")

        if not self.allow_off_grid:
            if not any(abs(self.lr - g) <= 1e-12 for g in LR_GRID):
                raise ConfigError(f"lr {self.lr} is not on the grid {LR_GRID}; set allow_off_grid=true to override")
            if not any(abs(self.weight_decay - g) <= 1e-12 for g in WEIGHT_DECAY_GRID):
                raise ConfigError(
                    f"weight_decay {self.weight_decay} is not on the grid {WEIGHT_DECAY_GRID}; "
                    f"set allow_off_grid=true to override"
                )

    @property
    def window_steps(self) -> int:
        """N, the number of unit intervals spanned by an input window"""
        return self.input_len - 1

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_overrides(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def config_keys() -> List[str]:
    return [f.name for f in fields(RunConfig)]


def config_defaults() -> Dict[str, Any]:
    defaults = {}
    for f in fields(RunConfig):
        defaults[f.name] = f.default if f.default is not MISSING else f.default_factory()
    return defaults


def parse_override(item: str) -> tuple:
    """Split `key=value`; the value is read as a JSON literal when possible"""
    if "=" not in item:
        raise ConfigError(f"Override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def build_config(values: Dict[str, Any], overrides: Sequence[str] = ()) -> RunConfig:
    """Merge a flat mapping with overrides and validate the result"""
    merged = dict(values)
    for item in overrides:
        key, value = parse_override(item)
        merged[key] = value

    valid = config_keys()
    unknown = sorted(set(merged) - set(valid))
    if unknown:
        raise ConfigError(f"Unknown config key(s) {unknown}; valid keys are: {', '.join(valid)}")

    try:
        return RunConfig(**merged)
    except TypeError as e:
        raise ConfigError(f"Invalid configuration: {e}")


def load_config(path: Optional[Path], overrides: Sequence[str] = ()) -> RunConfig:
    """Load a JSON config file (or defaults when path is None) and apply overrides"""
    values: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, "r") as f:
                values = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}")
        if not isinstance(values, dict):
            raise ConfigError(f"Config file {path} must contain a JSON object")

        # Relative dataset paths are resolved against the config file's directory
        for key in ("values_csv", "meta_json"):
            if isinstance(values.get(key), str) and not Path(values[key]).is_absolute():
                values[key] = str((path.parent / values[key]).resolve())

    return build_config(values, overrides)


def save_config(config: RunConfig, path: Path):
    """Write the resolved configuration snapshot"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
