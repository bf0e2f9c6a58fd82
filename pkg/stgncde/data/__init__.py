from .dataset import DatasetMeta, convert_npz, generate_synthetic, load_dataset, save_dataset
from .masking import apply_missing_mask, export_masks, missing_mask
from .metrics import Metrics, compute_metrics, per_horizon_metrics, persistence_forecast
from .windows import (
    NormStats,
    WindowBatch,
    WindowDataset,
    denorm,
    fit_norm_stats,
    make_windows,
    prepare_datasets,
    split_6_2_2,
    zscore,
)

__all__ = [
    'DatasetMeta', 'convert_npz', 'generate_synthetic', 'load_dataset', 'save_dataset',
    'apply_missing_mask', 'export_masks', 'missing_mask',
    'Metrics', 'compute_metrics', 'per_horizon_metrics', 'persistence_forecast',
    'NormStats', 'WindowBatch', 'WindowDataset', 'denorm', 'fit_norm_stats', 'make_windows',
    'prepare_datasets', 'split_6_2_2', 'zscore',
]
