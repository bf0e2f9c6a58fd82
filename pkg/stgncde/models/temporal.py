from typing import Optional

from ..autodiff import Tensor
from ..interpolation import ControlPath
from .base import BaseForecaster
from .functions import AugmentedState, initial_values, output_layer, temporal_vector_field
from .params import ModelVariant


class TemporalOnlyForecaster(BaseForecaster):
    """Only H evolves; predictions are read from H(T)"""

    variant = ModelVariant.TEMPORAL_ONLY.value

    def initial_state(self, X0: Tensor) -> AugmentedState:
        return initial_values(X0, self.params, with_spatial=False)

    def vector_field(self, t: float, state: AugmentedState, path: ControlPath,
                     adjacency: Optional[Tensor] = None) -> AugmentedState:
        return temporal_vector_field(state, Tensor(path.derivative(t)), self.params)

    def readout(self, state: AugmentedState) -> Tensor:
        return output_layer(state.H, self.params)
