"""Checkpoints as a JSON manifest plus one binary file of little-endian float64 arrays.

Manifest layout:
    {
      "format": "stgncde-checkpoint", "version": 1,
      "variant": ..., "dims": {...}, "config": {...},
      "epoch": int, "best_val_mae": float, "norm_stats": {"mean": [...], "std": [...]},
      "arrays_file": "checkpoint.bin",
      "arrays": [{"name": ..., "shape": [...], "offset": bytes, "dtype": "<f8"}, ...]
    }
Arrays are stored back to back in manifest order.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict

import numpy as np

from ..autodiff import parameter
from ..data import NormStats
from ..errors import DataError
from ..models import ModelDims, ModelParams
from ..utils.logger import logger

MANIFEST_NAME = "checkpoint.json"
ARRAYS_NAME = "checkpoint.bin"
FORMAT_NAME = "stgncde-checkpoint"
FORMAT_VERSION = 1
DTYPE = "<f8"


@dataclass
class Checkpoint:
    params: ModelParams
    norm_stats: NormStats
    epoch: int = 0
    best_val_mae: float = float("inf")
    config: Dict[str, Any] = field(default_factory=dict)


def _save_data(file: Path, data: Dict):
    with open(file, "w") as f:
        json.dump(data, f, indent=2)


def _load_data(file: Path) -> Dict:
    try:
        with open(file, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        raise DataError(f"Checkpoint manifest not found: {file}")
    except json.JSONDecodeError as e:
        raise DataError(f"Checkpoint manifest {file} is not valid JSON: {e}")


def save_checkpoint(directory: Path, checkpoint: Checkpoint) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    entries = []
    offset = 0
    with open(directory / ARRAYS_NAME, "wb") as f:
        for name, tensor in checkpoint.params.named_parameters():
            raw = np.ascontiguousarray(tensor.data, dtype=DTYPE).tobytes()
            entries.append({"name": name, "shape": list(tensor.shape), "offset": offset, "dtype": DTYPE})
            f.write(raw)
            offset += len(raw)

    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "variant": checkpoint.params.variant,
        "dims": checkpoint.params.dims.to_dict(),
        "config": checkpoint.config,
        "epoch": checkpoint.epoch,
        "best_val_mae": checkpoint.best_val_mae,
        "norm_stats": checkpoint.norm_stats.to_dict(),
        "arrays_file": ARRAYS_NAME,
        "arrays": entries,
    }
    manifest_path = directory / MANIFEST_NAME
    _save_data(manifest_path, manifest)
    logger.debug(f"Saved checkpoint (epoch {checkpoint.epoch}) to {manifest_path}")
    return manifest_path


def load_checkpoint(directory: Path) -> Checkpoint:
    directory = Path(directory)
    manifest = _load_data(directory / MANIFEST_NAME)
    if manifest.get("format") != FORMAT_NAME:
        raise DataError(f"{directory / MANIFEST_NAME} is not an stgncde checkpoint")
    if manifest.get("version") != FORMAT_VERSION:
        raise DataError(f"Unsupported checkpoint version {manifest.get('version')}")

    arrays_path = directory / manifest.get("arrays_file", ARRAYS_NAME)
    if not arrays_path.is_file():
        raise DataError(f"Checkpoint arrays not found: {arrays_path}")
    blob = arrays_path.read_bytes()

    tensors = {}
    for entry in manifest["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = entry["offset"] + count * 8
        if end > len(blob):
            raise DataError(f"Checkpoint arrays file is truncated at {entry['name']}")
        values = np.frombuffer(blob, dtype=entry.get("dtype", DTYPE), count=count, offset=entry["offset"])
        tensors[entry["name"]] = parameter(values.astype(np.float64).reshape(shape), entry["name"])

    params = ModelParams(ModelDims(**manifest["dims"]), manifest["variant"], tensors)
    return Checkpoint(
        params=params,
        norm_stats=NormStats.from_dict(manifest["norm_stats"]),
        epoch=int(manifest["epoch"]),
        best_val_mae=float(manifest["best_val_mae"]),
        config=manifest.get("config", {}),
    )
