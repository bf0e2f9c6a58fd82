"""Hyperparameter grids and the best per-dataset settings."""

from typing import Any, Dict

LR_GRID = (1e-2, 5e-3, 1e-3, 5e-4, 1e-4)
WEIGHT_DECAY_GRID = (1e-4, 1e-3, 1e-2)
HIDDEN_GRID = (32, 64, 128, 256)
NUM_LAYERS_GRID = (1, 2, 3)
EMBED_DIM_RANGE = tuple(range(1, 11))

# Values a sweep may take per key; keys not listed sweep freely
SWEEP_GRIDS = {
    'lr': LR_GRID,
    'weight_decay': WEIGHT_DECAY_GRID,
    'hidden_h': HIDDEN_GRID,
    'hidden_z': HIDDEN_GRID,
    'num_layers': NUM_LAYERS_GRID,
    'embed_dim': EMBED_DIM_RANGE,
}

# Missing rates accepted by mask-eval
MASK_RATE_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)

DATASET_SUMMARY = {
    'pemsd3': {'name': 'PeMSD3', 'num_nodes': 358, 'num_steps': 26208, 'value_type': 'volume'},
    'pemsd4': {'name': 'PeMSD4', 'num_nodes': 307, 'num_steps': 16992, 'value_type': 'volume'},
    'pemsd7': {'name': 'PeMSD7', 'num_nodes': 883, 'num_steps': 28224, 'value_type': 'volume'},
    'pemsd8': {'name': 'PeMSD8', 'num_nodes': 170, 'num_steps': 17856, 'value_type': 'volume'},
    'pemsd7m': {'name': 'PeMSD7(M)', 'num_nodes': 228, 'num_steps': 12672, 'value_type': 'velocity'},
    'pemsd7l': {'name': 'PeMSD7(L)', 'num_nodes': 1026, 'num_steps': 12672, 'value_type': 'velocity'},
}

DATASET_PRESETS = {
    'pemsd3': {'num_layers': 1, 'embed_dim': 2, 'hidden': 64, 'lr': 1e-3, 'weight_decay': 1e-3},
    'pemsd4': {'num_layers': 2, 'embed_dim': 8, 'hidden': 64, 'lr': 1e-3, 'weight_decay': 1e-3},
    'pemsd7': {'num_layers': 2, 'embed_dim': 10, 'hidden': 64, 'lr': 1e-3, 'weight_decay': 1e-3},
    'pemsd8': {'num_layers': 1, 'embed_dim': 2, 'hidden': 32, 'lr': 1e-3, 'weight_decay': 1e-3},
    'pemsd7m': {'num_layers': 1, 'embed_dim': 10, 'hidden': 32, 'lr': 1e-3, 'weight_decay': 1e-3},
    'pemsd7l': {'num_layers': 1, 'embed_dim': 10, 'hidden': 32, 'lr': 1e-3, 'weight_decay': 1e-3},
}


def preset_config(key: str) -> Dict[str, Any]:
    """Flat config values for a dataset template"""
    if key not in DATASET_PRESETS:
        raise KeyError(f"Unknown dataset preset: {key}")
    preset = DATASET_PRESETS[key]
    return {
        'dataset': 'csv',
        'values_csv': f"../data/{key}/values.csv",
        'meta_json': f"../data/{key}/meta.json",
        'variant': 'full',
        'num_layers': preset['num_layers'],
        'embed_dim': preset['embed_dim'],
        'hidden_h': preset['hidden'],
        'hidden_z': preset['hidden'],
        'lr': preset['lr'],
        'weight_decay': preset['weight_decay'],
        'epochs': 200,
        'batch_size': 64,
        'patience': 15,
    }
