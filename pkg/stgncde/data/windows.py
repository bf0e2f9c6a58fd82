from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..config import RunConfig
from ..errors import DataError
from ..interpolation import ControlPath, build_control_paths
from ..utils.logger import logger
from .masking import apply_missing_mask

SPLIT_NAMES = ("train", "val", "test")


def split_6_2_2(series: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chronological split into floor(0.6L), floor(0.2L) and the remainder"""
    length = len(series)
    n_train = (6 * length) // 10
    n_val = (2 * length) // 10
    return series[:n_train], series[n_train:n_train + n_val], series[n_train + n_val:]


def make_windows(split: np.ndarray, input_len: int = 12, horizon: int = 12,
                 output_dim: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Stride-1 windows inside one split.

    split: (T, V, D). Returns inputs (W, V, input_len, D) and targets
    (W, V, horizon, M) with W = T - input_len - horizon + 1 (0 when too short).
    Targets keep the first M = output_dim features.
    """
    split = np.asarray(split, dtype=np.float64)
    num_steps, num_nodes, num_features = split.shape
    output_dim = num_features if output_dim is None else output_dim
    span = input_len + horizon
    if num_steps < span:
        return (np.zeros((0, num_nodes, input_len, num_features)),
                np.zeros((0, num_nodes, horizon, output_dim)))

    # (W, V, D, span) -> (W, V, span, D)
    views = np.swapaxes(sliding_window_view(split, span, axis=0), -1, -2)
    inputs = np.ascontiguousarray(views[:, :, :input_len, :])
    targets = np.ascontiguousarray(views[:, :, input_len:, :output_dim])
    return inputs, targets


@dataclass(frozen=True)
class NormStats:
    """Per-channel mean and std from the training split"""

    mean: np.ndarray
    std: np.ndarray

    def to_dict(self) -> Dict[str, list]:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, raw: Dict[str, list]) -> "NormStats":
        return cls(np.asarray(raw["mean"], dtype=np.float64), np.asarray(raw["std"], dtype=np.float64))

    def channels(self, count: int) -> "NormStats":
        return NormStats(self.mean[:count], self.std[:count])


def fit_norm_stats(train: np.ndarray) -> NormStats:
    flat = np.asarray(train, dtype=np.float64).reshape(-1, train.shape[-1])
    mean = flat.mean(axis=0)
    std = flat.std(axis=0)
    constant = std <= 0
    if np.any(constant):
        logger.warning(f"Channels {np.flatnonzero(constant).tolist()} are constant in the training split; std set to 1")
        std = np.where(constant, 1.0, std)
    return NormStats(mean, std)


def zscore(stats: NormStats, x: np.ndarray) -> np.ndarray:
    return (x - stats.mean) / stats.std


def denorm(stats: NormStats, x: np.ndarray) -> np.ndarray:
    return x * stats.std + stats.mean


@dataclass
class WindowBatch:
    inputs: np.ndarray      # (B, V, L, D), normalized
    targets: np.ndarray     # (B, V, S, M), original units
    masks: np.ndarray       # (B, V, L), True where observed
    norm_stats: NormStats
    paths: ControlPath
    indices: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)


class WindowDataset:
    """Windows of one split with their masks and precomputed control paths"""

    def __init__(self, name: str, inputs: np.ndarray, targets: np.ndarray, masks: np.ndarray,
                 norm_stats: NormStats):
        self.name = name
        self.raw_inputs = inputs
        self.inputs = zscore(norm_stats, inputs)
        self.targets = targets
        self.masks = masks
        self.norm_stats = norm_stats
        fill = zscore(norm_stats, norm_stats.mean)
        self.paths = build_control_paths(self.inputs, masks, fill)

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def num_nodes(self) -> int:
        return self.targets.shape[1]

    def batch(self, indices: np.ndarray) -> WindowBatch:
        return WindowBatch(
            inputs=self.inputs[indices],
            targets=self.targets[indices],
            masks=self.masks[indices],
            norm_stats=self.norm_stats,
            paths=self.paths[indices],
            indices=indices,
        )

    def batches(self, batch_size: int, rng: Optional[np.random.Generator] = None) -> Iterator[WindowBatch]:
        """Mini-batches in order, or shuffled when a generator is given"""
        order = np.arange(len(self)) if rng is None else rng.permutation(len(self))
        for start in range(0, len(order), batch_size):
            yield self.batch(order[start:start + batch_size])


def prepare_datasets(series: np.ndarray, config: RunConfig, missing_rate: Optional[float] = None,
                     norm_stats: Optional[NormStats] = None) -> Dict[str, WindowDataset]:
    """Split, window, normalize and mask a (T, V, D) series.

    Statistics are fitted on the train split unless `norm_stats` is given,
    e.g. the ones stored with a checkpoint.
    """
    rate = config.missing_rate if missing_rate is None else missing_rate
    if config.output_dim > series.shape[-1]:
        raise DataError(f"output_dim {config.output_dim} exceeds the {series.shape[-1]} available features")

    splits = dict(zip(SPLIT_NAMES, split_6_2_2(series)))
    if norm_stats is None:
        stats = fit_norm_stats(splits["train"])
    elif norm_stats.mean.shape != (series.shape[-1],):
        raise DataError(f"Normalization statistics cover {norm_stats.mean.shape[0]} channels, "
                        f"the series has {series.shape[-1]}")
    else:
        stats = norm_stats

    datasets: Dict[str, WindowDataset] = {}
    for offset, name in enumerate(SPLIT_NAMES):
        inputs, targets = make_windows(splits[name], config.input_len, config.horizon, config.output_dim)
        if len(inputs) == 0:
            raise DataError(
                f"The {name} split has {len(splits[name])} steps, too short for "
                f"{config.input_len}+{config.horizon} windows"
            )
        masks = apply_missing_mask(inputs, rate, seed=config.seed, stream=offset)
        datasets[name] = WindowDataset(name, inputs, targets, masks, stats)
        logger.debug(f"{name}: {len(inputs)} windows")
    return datasets
