from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from ..data import Metrics

TRAINING_LOG_COLUMNS = ["epoch", "train_loss", "val_mae", "val_rmse", "val_mape", "seconds"]
TABLE_COLUMNS = ["rate", "variant", "MAE", "RMSE", "MAPE"]


def _write(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def write_training_log(rows: List[Dict[str, Any]], path: Path) -> Path:
    return _write(pd.DataFrame(rows, columns=TRAINING_LOG_COLUMNS), path)


def write_horizon_metrics(horizons: Sequence[Metrics], path: Path) -> Path:
    """One row per forecast step: horizon, mae, rmse, mape"""
    rows = [{"horizon": h + 1, **m.to_dict()} for h, m in enumerate(horizons)]
    return _write(pd.DataFrame(rows, columns=["horizon", "mae", "rmse", "mape"]), path)


def write_predictions(predictions: np.ndarray, path: Path) -> Path:
    """Long format (window, node, horizon, prediction) for (W, V, S, M) forecasts of the first channel"""
    predictions = np.asarray(predictions)
    windows, nodes, horizons = predictions.shape[:3]
    w, v, h = np.meshgrid(np.arange(windows), np.arange(nodes), np.arange(horizons), indexing="ij")
    frame = pd.DataFrame({
        "window": w.reshape(-1),
        "node": v.reshape(-1),
        "horizon": h.reshape(-1) + 1,
        "prediction": predictions[..., 0].reshape(-1),
    })
    return _write(frame, path)


def write_node_series(predictions: np.ndarray, targets: np.ndarray, node: int, path: Path,
                      horizon_step: int = 1, input_len: int = 12) -> Path:
    """Truth and forecast at one horizon step for one node, one row per window.

    `t` is the index of the forecast time point inside the split.
    """
    step = horizon_step - 1
    frame = pd.DataFrame({
        "t": np.arange(len(predictions)) + input_len + step,
        "truth": targets[:, node, step, 0],
        "prediction": predictions[:, node, step, 0],
    })
    return _write(frame, path)


def write_table(rows: List[Dict[str, Any]], path: Path, columns: Sequence[str] = TABLE_COLUMNS) -> Path:
    return _write(pd.DataFrame(rows, columns=list(columns)), path)
