from abc import ABC, abstractmethod
from typing import Optional

from ..autodiff import Tensor
from ..interpolation import ControlPath
from ..solver import SolverConfig, integrate
from .functions import AugmentedState, normalized_adaptive_adjacency
from .params import ModelDims, ModelParams, init_params


class BaseForecaster(ABC):
    """Base class for all model variants"""

    variant: str = ""

    def __init__(self, params: ModelParams, solver: Optional[SolverConfig] = None):
        if params.variant != self.variant:
            raise ValueError(f"{type(self).__name__} needs {self.variant} parameters, got {params.variant}")
        self.params = params
        self.solver = solver or SolverConfig()

    @classmethod
    def build(cls, dims: ModelDims, solver: Optional[SolverConfig] = None, seed: int = 0) -> "BaseForecaster":
        return cls(init_params(dims, cls.variant, seed), solver)

    @property
    def dims(self) -> ModelDims:
        return self.params.dims

    @abstractmethod
    def initial_state(self, X0: Tensor) -> AugmentedState:
        """Initial augmented state from the control path at t=0"""
        pass

    @abstractmethod
    def vector_field(self, t: float, state: AugmentedState, path: ControlPath,
                     adjacency: Optional[Tensor] = None) -> AugmentedState:
        """Time derivative of the augmented state"""
        pass

    @abstractmethod
    def readout(self, state: AugmentedState) -> Tensor:
        """Map the final state to predictions of shape (..., V, S, M)"""
        pass

    def adjacency(self) -> Optional[Tensor]:
        if "embedding" not in self.params:
            return None
        return normalized_adaptive_adjacency(self.params.embedding)

    def solve(self, path: ControlPath) -> AugmentedState:
        """Integrate the augmented ODE over the whole window"""
        adjacency = self.adjacency()
        state0 = self.initial_state(Tensor(path.evaluate(0.0)))

        def field(t: float, state: AugmentedState) -> AugmentedState:
            return self.vector_field(t, state, path, adjacency)

        return integrate(field, state0, (0.0, float(path.num_units)), self.solver)

    def forward(self, path: ControlPath) -> Tensor:
        return self.readout(self.solve(path))

    __call__ = forward
