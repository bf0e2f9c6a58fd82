from typing import Optional

from ..config import VARIANT_ALIASES
from ..errors import ConfigError
from ..solver import SolverConfig
from .base import BaseForecaster
from .full import FullForecaster
from .functions import (
    AugmentedState,
    initial_values,
    normalized_adaptive_adjacency,
    output_layer,
    spatial_cde_func,
    temporal_cde_func,
)
from .params import Linear, ModelDims, ModelParams, ModelVariant, init_params, parameter_layout
from .spatial import SpatialOnlyForecaster
from .temporal import TemporalOnlyForecaster

VARIANTS = {
    ModelVariant.FULL.value: FullForecaster,
    ModelVariant.TEMPORAL_ONLY.value: TemporalOnlyForecaster,
    ModelVariant.SPATIAL_ONLY.value: SpatialOnlyForecaster,
}


def get_model_class(variant: str):
    """Resolve a variant name, alias or ModelVariant to its forecaster class"""
    if isinstance(variant, ModelVariant):
        variant = variant.value
    key = VARIANT_ALIASES.get(variant)
    if key is None:
        raise ConfigError(f"Unknown model variant {variant!r}; choose from {sorted(VARIANT_ALIASES)}")
    return VARIANTS[key]


def create_model(variant: str, dims: ModelDims, solver: Optional[SolverConfig] = None, seed: int = 0) -> BaseForecaster:
    return get_model_class(variant).build(dims, solver, seed)


def model_from_params(params: ModelParams, solver: Optional[SolverConfig] = None) -> BaseForecaster:
    return get_model_class(params.variant)(params, solver)


__all__ = [
    'AugmentedState', 'BaseForecaster', 'FullForecaster', 'TemporalOnlyForecaster', 'SpatialOnlyForecaster',
    'Linear', 'ModelDims', 'ModelParams', 'ModelVariant', 'VARIANTS',
    'create_model', 'get_model_class', 'init_params', 'initial_values', 'model_from_params',
    'normalized_adaptive_adjacency', 'output_layer', 'parameter_layout', 'spatial_cde_func',
    'temporal_cde_func',
]
