from dataclasses import asdict, dataclass
from typing import Dict, List

import numpy as np

from ..errors import ShapeError

MAPE_EPSILON = 0.1


@dataclass(frozen=True)
class Metrics:
    mae: float
    rmse: float
    mape: float  # percent

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def compute_metrics(pred: np.ndarray, target: np.ndarray, eps: float = MAPE_EPSILON) -> Metrics:
    """MAE, RMSE and MAPE (%), the last over entries with |target| > eps only; 0 when none qualify"""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"Prediction shape {pred.shape} does not match target shape {target.shape}")
    if pred.size == 0:
        return Metrics(0.0, 0.0, 0.0)

    error = pred - target
    mae = float(np.mean(np.abs(error)))
    rmse = float(np.sqrt(np.mean(error * error)))
    eligible = np.abs(target) > eps
    mape = float(np.mean(np.abs(error[eligible] / target[eligible])) * 100.0) if np.any(eligible) else 0.0
    return Metrics(mae, rmse, mape)


def per_horizon_metrics(pred: np.ndarray, target: np.ndarray) -> List[Metrics]:
    """Metrics per forecast step for arrays shaped (..., V, S, M)"""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ShapeError(f"Prediction shape {pred.shape} does not match target shape {target.shape}")
    return [compute_metrics(pred[..., h, :], target[..., h, :]) for h in range(pred.shape[-2])]


def persistence_forecast(raw_inputs: np.ndarray, horizon: int = 12, output_dim: int = 1) -> np.ndarray:
    """Repeat the last observed input value across the horizon: (W, V, L, D) -> (W, V, S, M)"""
    last = np.asarray(raw_inputs)[:, :, -1:, :output_dim]
    return np.repeat(last, horizon, axis=2)
