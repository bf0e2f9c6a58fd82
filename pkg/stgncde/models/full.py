from typing import Optional

from ..autodiff import Tensor
from ..interpolation import ControlPath
from .base import BaseForecaster
from .functions import AugmentedState, full_vector_field, initial_values, output_layer
from .params import ModelVariant


class FullForecaster(BaseForecaster):
    """Temporal and spatial CDEs integrated jointly; Z is driven by dH/dt"""

    variant = ModelVariant.FULL.value

    def initial_state(self, X0: Tensor) -> AugmentedState:
        return initial_values(X0, self.params)

    def vector_field(self, t: float, state: AugmentedState, path: ControlPath,
                     adjacency: Optional[Tensor] = None) -> AugmentedState:
        return full_vector_field(state, Tensor(path.derivative(t)), self.params, adjacency)

    def readout(self, state: AugmentedState) -> Tensor:
        return output_layer(state.Z, self.params)
