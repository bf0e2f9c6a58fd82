"""CDE vector fields, adaptive adjacency, initial values and the output head.

Every function accepts node-major tensors with optional leading batch axes,
e.g. H of shape (B, V, hidden_h) or (V, hidden_h).
"""

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from ..autodiff import Tensor, eye, relu, softmax_rows, tanh
from .params import ModelParams


@dataclass
class AugmentedState:
    """Joint state of the augmented ODE; a field is None when the variant does not evolve it"""

    H: Optional[Tensor] = None
    Z: Optional[Tensor] = None

    def __add__(self, other: "AugmentedState") -> "AugmentedState":
        return AugmentedState(_add(self.H, other.H), _add(self.Z, other.Z))

    def __mul__(self, scale: float) -> "AugmentedState":
        return AugmentedState(
            None if self.H is None else self.H * scale,
            None if self.Z is None else self.Z * scale,
        )

    __rmul__ = __mul__

    def arrays(self) -> Iterator[np.ndarray]:
        for part in (self.H, self.Z):
            if part is not None:
                yield part.data


def _add(a: Optional[Tensor], b: Optional[Tensor]) -> Optional[Tensor]:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _per_node_matrix(flat: Tensor, rows: int, cols: int) -> Tensor:
    return flat.reshape(flat.shape[:-1] + (rows, cols))


def _apply_per_node(matrix: Tensor, vector: Tensor) -> Tensor:
    """(..., V, r, c) times (..., V, c) -> (..., V, r)"""
    column = vector.reshape(vector.shape + (1,))
    product = matrix @ column
    return product.reshape(product.shape[:-1])


def temporal_cde_func(H: Tensor, params: ModelParams) -> Tensor:
    """f(H): K+1 ReLU layers and a tanh layer, each row independently; (..., V, h, D)"""
    activation = H
    for layer in params.f_layers:
        activation = relu(layer(activation))
    out = tanh(params.f_out(activation))
    return _per_node_matrix(out, params.dims.hidden_h, params.dims.input_dim)


def normalized_adaptive_adjacency(E: Tensor) -> Tensor:
    """I + softmax_rows(relu(E @ E.T))"""
    scores = relu(E @ E.T)
    return eye(E.shape[0]) + softmax_rows(scores)


def spatial_cde_func(Z: Tensor, params: ModelParams, adjacency: Optional[Tensor] = None) -> Tensor:
    """g(Z) with one graph convolution over the learned adjacency.

    Returns (..., V, hidden_z, cols) where cols is hidden_h for the full model and
    the input dimension for the spatial-only model. `adjacency` replaces the learned
    matrix when given.
    """
    b0 = relu(params.g_in(Z))
    if adjacency is None:
        adjacency = normalized_adaptive_adjacency(params.embedding)
    b1 = adjacency @ b0 @ params.w_spatial
    out = tanh(params.g_out(b1))
    z = params.dims.hidden_z
    return _per_node_matrix(out, z, params.g_out.out_features // z)


def initial_values(X0: Tensor, params: ModelParams, with_spatial: bool = True) -> AugmentedState:
    """H(0) from the path at t=0, then Z(0) from H(0)"""
    H0 = params.h0_fc(X0)
    if not with_spatial:
        return AugmentedState(H=H0)
    return AugmentedState(H=H0, Z=params.z0_fc(H0))


def output_layer(ZT: Tensor, params: ModelParams) -> Tensor:
    """Per-node affine read-out reshaped to (..., V, S, M)"""
    flat = ZT @ params.w_output + params.b_output
    return flat.reshape(flat.shape[:-1] + (params.dims.horizon, params.dims.output_dim))


def full_vector_field(state: AugmentedState, dX: Tensor, params: ModelParams,
                      adjacency: Optional[Tensor] = None) -> AugmentedState:
    dH = _apply_per_node(temporal_cde_func(state.H, params), dX)
    dZ = _apply_per_node(spatial_cde_func(state.Z, params, adjacency), dH)
    return AugmentedState(H=dH, Z=dZ)


def temporal_vector_field(state: AugmentedState, dX: Tensor, params: ModelParams) -> AugmentedState:
    return AugmentedState(H=_apply_per_node(temporal_cde_func(state.H, params), dX))


def spatial_vector_field(state: AugmentedState, dX: Tensor, params: ModelParams,
                         adjacency: Optional[Tensor] = None) -> AugmentedState:
    return AugmentedState(Z=_apply_per_node(spatial_cde_func(state.Z, params, adjacency), dX))
