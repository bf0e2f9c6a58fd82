from typing import Optional

from ..autodiff import Tensor
from ..interpolation import ControlPath
from .base import BaseForecaster
from .functions import AugmentedState, initial_values, output_layer, spatial_vector_field
from .params import ModelVariant


class SpatialOnlyForecaster(BaseForecaster):
    """Only Z evolves, controlled directly by X(t)"""

    variant = ModelVariant.SPATIAL_ONLY.value

    def initial_state(self, X0: Tensor) -> AugmentedState:
        # H(0) only seeds Z(0); it is not integrated
        return AugmentedState(Z=initial_values(X0, self.params).Z)

    def vector_field(self, t: float, state: AugmentedState, path: ControlPath,
                     adjacency: Optional[Tensor] = None) -> AugmentedState:
        return spatial_vector_field(state, Tensor(path.derivative(t)), self.params, adjacency)

    def readout(self, state: AugmentedState) -> Tensor:
        return output_layer(state.Z, self.params)
