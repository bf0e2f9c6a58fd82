from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..autodiff import Tensor, parameter
from ..config import RunConfig
from ..errors import ShapeError


class ModelVariant(str, Enum):
    FULL = "full"
    TEMPORAL_ONLY = "temporal_only"
    SPATIAL_ONLY = "spatial_only"


@dataclass(frozen=True)
class ModelDims:
    num_nodes: int
    input_dim: int = 1
    hidden_h: int = 32
    hidden_z: int = 32
    num_layers: int = 1
    embed_dim: int = 2
    horizon: int = 12
    output_dim: int = 1

    @classmethod
    def from_config(cls, config: RunConfig, num_nodes: int, input_dim: int) -> "ModelDims":
        return cls(
            num_nodes=num_nodes,
            input_dim=input_dim,
            hidden_h=config.hidden_h,
            hidden_z=config.hidden_z,
            num_layers=config.num_layers,
            embed_dim=config.embed_dim,
            horizon=config.horizon,
            output_dim=config.output_dim,
        )

    def to_dict(self) -> Dict[str, int]:
        return dict(self.__dict__)


@dataclass
class Linear:
    """Affine map shared by every node: rows of x are mapped by x @ weight + bias"""

    weight: Tensor
    bias: Tensor

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias

    @property
    def in_features(self) -> int:
        return self.weight.shape[0]

    @property
    def out_features(self) -> int:
        return self.weight.shape[1]


def parameter_layout(dims: ModelDims, variant: str) -> "OrderedDict[str, Tuple[int, ...]]":
    """Names and shapes of every trainable tensor, in a fixed order"""
    h, z, d = dims.hidden_h, dims.hidden_z, dims.input_dim
    layout: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()

    def linear(name: str, fan_in: int, fan_out: int):
        layout[f"{name}.weight"] = (fan_in, fan_out)
        layout[f"{name}.bias"] = (fan_out,)

    if variant != ModelVariant.SPATIAL_ONLY:
        for k in range(dims.num_layers + 1):
            linear(f"f_layers.{k}", h, h)
        linear("f_out", h, h * d)

    if variant != ModelVariant.TEMPORAL_ONLY:
        linear("g_in", z, z)
        g_cols = d if variant == ModelVariant.SPATIAL_ONLY else h
        linear("g_out", z, z * g_cols)
        layout["embedding"] = (dims.num_nodes, dims.embed_dim)
        layout["w_spatial"] = (z, z)

    linear("h0_fc", d, h)
    if variant != ModelVariant.TEMPORAL_ONLY:
        linear("z0_fc", h, z)

    readout_dim = h if variant == ModelVariant.TEMPORAL_ONLY else z
    layout["w_output"] = (readout_dim, dims.horizon * dims.output_dim)
    layout["b_output"] = (dims.horizon * dims.output_dim,)
    return layout


class ModelParams:
    """All trainable tensors of one model, addressable by name"""

    def __init__(self, dims: ModelDims, variant: str, tensors: Dict[str, Tensor]):
        self.dims = dims
        self.variant = variant
        expected = parameter_layout(dims, variant)
        missing = [name for name in expected if name not in tensors]
        if missing:
            raise ShapeError(f"Missing parameters for variant {variant}: {missing}")
        self.tensors: "OrderedDict[str, Tensor]" = OrderedDict()
        for name, shape in expected.items():
            value = tensors[name]
            if value.shape != shape:
                raise ShapeError(f"Parameter {name} has shape {value.shape}, expected {shape}")
            value.name = name
            self.tensors[name] = value

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self.tensors.values())

    def linear(self, prefix: str) -> Linear:
        return Linear(self.tensors[f"{prefix}.weight"], self.tensors[f"{prefix}.bias"])

    @property
    def f_layers(self) -> List[Linear]:
        return [self.linear(f"f_layers.{k}") for k in range(self.dims.num_layers + 1)]

    @property
    def f_out(self) -> Linear:
        return self.linear("f_out")

    @property
    def g_in(self) -> Linear:
        return self.linear("g_in")

    @property
    def g_out(self) -> Linear:
        return self.linear("g_out")

    @property
    def h0_fc(self) -> Linear:
        return self.linear("h0_fc")

    @property
    def z0_fc(self) -> Linear:
        return self.linear("z0_fc")

    @property
    def embedding(self) -> Tensor:
        return self.tensors["embedding"]

    @property
    def w_spatial(self) -> Tensor:
        return self.tensors["w_spatial"]

    @property
    def w_output(self) -> Tensor:
        return self.tensors["w_output"]

    @property
    def b_output(self) -> Tensor:
        return self.tensors["b_output"]

    def parameters(self) -> List[Tensor]:
        return list(self.tensors.values())

    def named_parameters(self) -> List[Tuple[str, Tensor]]:
        return list(self.tensors.items())

    def num_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def names_with_prefix(self, *prefixes: str) -> List[str]:
        return [name for name in self.tensors if name.startswith(prefixes)]

    def state_dict(self) -> "OrderedDict[str, np.ndarray]":
        return OrderedDict((name, t.data.copy()) for name, t in self.tensors.items())

    def load_state_dict(self, state: Dict[str, np.ndarray]):
        """Replace parameter values in place; names and shapes must match exactly"""
        unknown = sorted(set(state) - set(self.tensors))
        if unknown:
            raise ShapeError(f"Unknown parameters in state: {unknown}")
        for name, tensor in self.tensors.items():
            if name not in state:
                raise ShapeError(f"State is missing parameter {name}")
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise ShapeError(f"Parameter {name} has shape {value.shape}, expected {tensor.shape}")
            tensor.data = np.ascontiguousarray(value.copy())

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.dims, self.variant,
            {name: parameter(t.data.copy(), name) for name, t in self.tensors.items()},
        )


def init_params(dims: ModelDims, variant: str, seed: int = 0, rng: Optional[np.random.Generator] = None) -> ModelParams:
    """Uniform(+-1/sqrt(fan_in)) for affine maps; the node embedding draws U(-1, 1) * 0.1"""
    try:
        variant = ModelVariant(variant).value
    except ValueError:
        raise ValueError(f"Unknown model variant: {variant}") from None
    rng = rng if rng is not None else np.random.default_rng(seed)

    tensors: Dict[str, Tensor] = {}
    layout = parameter_layout(dims, variant)
    for name, shape in layout.items():
        if name == "embedding":
            values = rng.uniform(-1.0, 1.0, size=shape) * 0.1
        elif name == "w_spatial" or name == "w_output":
            values = rng.uniform(-1.0, 1.0, size=shape) / np.sqrt(shape[0])
        elif name == "b_output":
            fan_in = layout["w_output"][0]
            values = rng.uniform(-1.0, 1.0, size=shape) / np.sqrt(fan_in)
        elif name.endswith(".weight"):
            values = rng.uniform(-1.0, 1.0, size=shape) / np.sqrt(shape[0])
        else:
            fan_in = layout[name[: -len(".bias")] + ".weight"][0]
            values = rng.uniform(-1.0, 1.0, size=shape) / np.sqrt(fan_in)
        tensors[name] = parameter(values, name)
    return ModelParams(dims, variant, tensors)
