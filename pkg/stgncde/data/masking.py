from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import ConfigError


def missing_mask(num_windows: int, num_nodes: int, length: int, rate: float,
                 seed: int = 0, stream: int = 0) -> np.ndarray:
    """Boolean (W, V, L) mask with exactly floor(rate * L) False entries per (window, node)"""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"Missing rate must lie in [0, 1), got {rate}")
    mask = np.ones((num_windows, num_nodes, length), dtype=bool)
    dropped = int(np.floor(rate * length))
    if dropped == 0:
        return mask

    rng = np.random.default_rng([seed, stream])
    # argsort of iid uniforms gives a uniform permutation per row
    order = np.argsort(rng.random((num_windows, num_nodes, length)), axis=-1)
    np.put_along_axis(mask, order[..., :dropped], False, axis=-1)
    return mask


def apply_missing_mask(inputs: np.ndarray, rate: float, seed: int = 0, stream: int = 0) -> np.ndarray:
    """Observation mask for windows of shape (W, V, L, D); all channels of a node drop together"""
    num_windows, num_nodes, length = inputs.shape[:3]
    return missing_mask(num_windows, num_nodes, length, rate, seed, stream)


def export_masks(masks: np.ndarray, path: Path) -> Path:
    """Write masked-out (window_index, node, time_index) triples for auditing"""
    window, node, time = np.nonzero(~np.asarray(masks, dtype=bool))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"window_index": window, "node": node, "time_index": time}).to_csv(path, index=False)
    return path
