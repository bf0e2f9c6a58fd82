"""Dense float64 tensors with reverse-mode differentiation on a define-by-run tape.

Operations record onto the tape that is active in the current thread (entered
with ``with Tape():``). Outside a tape nothing is recorded, which is how
evaluation runs. Each thread owns its own tape stack, so independent tapes can
be driven concurrently against the same parameter tensors.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import settings
from ..errors import DivergenceError, GradientError, ShapeError

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_local = threading.local()


def _tape_stack() -> List["Tape"]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def active_tape() -> Optional["Tape"]:
    """The innermost tape entered in this thread, if any"""
    stack = _tape_stack()
    return stack[-1] if stack else None


@dataclass
class TapeNode:
    op: str
    inputs: Tuple[int, ...]
    backward: Optional[BackwardFn]
    shape: Tuple[int, ...]


class Tape:
    """Ordered record of operations; node ids are positions in `nodes`"""

    def __init__(self):
        self.nodes: List[TapeNode] = []
        self.leaves: Dict[int, Tuple[int, Tensor]] = {}
        self.generation = 0

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    def __len__(self) -> int:
        return len(self.nodes)

    def clear(self):
        """Drop every recorded node; tensors produced earlier become constants"""
        self.nodes = []
        self.leaves = {}
        self.generation += 1

    def _append(self, node: TapeNode) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def _leaf_id(self, tensor: "Tensor") -> int:
        entry = self.leaves.get(id(tensor))
        if entry is not None:
            return entry[0]
        node_id = self._append(TapeNode("leaf", (), None, tensor.shape))
        self.leaves[id(tensor)] = (node_id, tensor)
        return node_id

    def owns(self, tensor: "Tensor") -> bool:
        return (
            tensor.node_id is not None
            and tensor.tape is self
            and tensor.generation == self.generation
        )

    def tracks(self, tensor: "Tensor") -> bool:
        if self.owns(tensor):
            return True
        return tensor.requires_grad and tensor.node_id is None

    def node_of(self, tensor: "Tensor") -> int:
        if self.owns(tensor):
            return tensor.node_id
        if tensor.requires_grad and tensor.node_id is None:
            return self._leaf_id(tensor)
        return -1


class Tensor:
    """Immutable dense array of 64-bit reals"""

    __slots__ = ("data", "requires_grad", "node_id", "tape", "generation", "name", "__weakref__")

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: Optional[str] = None):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
        self.requires_grad = requires_grad
        self.node_id: Optional[int] = None
        self.tape: Optional[Tape] = None
        self.generation = -1
        self.name = name

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Tensor{label} shape={self.shape}, requires_grad={self.requires_grad}>"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self.node_id is None

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # Arithmetic
    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __neg__(self) -> "Tensor":
        return mul(self, -1.0)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return matmul(self, other)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self) -> "Tensor":
        return transpose(self)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def sum(self) -> "Tensor":
        return sum_all(self)

    def mean(self) -> "Tensor":
        return mean_all(self)

    def relu(self) -> "Tensor":
        return relu(self)

    def tanh(self) -> "Tensor":
        return tanh(self)

    def abs(self) -> "Tensor":
        return absolute(self)


def tensor(data: ArrayLike, requires_grad: bool = False, name: Optional[str] = None) -> Tensor:
    return Tensor(data, requires_grad=requires_grad, name=name)


def parameter(data: ArrayLike, name: Optional[str] = None) -> Tensor:
    """Leaf tensor that participates in differentiation"""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)


def as_tensor(value: ArrayLike) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _check_finite(op: str, inputs: Sequence[Tensor], out: np.ndarray):
    if np.all(np.isfinite(out)):
        return
    if all(np.all(np.isfinite(t.data)) for t in inputs):
        raise DivergenceError(f"{op} produced non-finite values from finite inputs")


def _record(op: str, inputs: Sequence[Tensor], out: np.ndarray, backward: BackwardFn) -> Tensor:
    if settings.DEBUG:
        _check_finite(op, inputs, out)

    result = Tensor(out)
    tape = active_tape()
    if tape is None or not any(tape.tracks(t) for t in inputs):
        return result

    input_ids = tuple(tape.node_of(t) for t in inputs)
    result.node_id = tape._append(TapeNode(op, input_ids, backward, result.shape))
    result.tape = tape
    result.generation = tape.generation
    result.requires_grad = True
    return result


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} cannot be broadcast together")


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "add")
    a_shape, b_shape = a.shape, b.shape

    def backward(g):
        return _unbroadcast(g, a_shape), _unbroadcast(g, b_shape)

    return _record("add", (a, b), a.data + b.data, backward)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "sub")
    a_shape, b_shape = a.shape, b.shape

    def backward(g):
        return _unbroadcast(g, a_shape), _unbroadcast(-g, b_shape)

    return _record("sub", (a, b), a.data - b.data, backward)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "mul")
    a_data, b_data = a.data, b.data

    def backward(g):
        return _unbroadcast(g * b_data, a_data.shape), _unbroadcast(g * a_data, b_data.shape)

    return _record("mul", (a, b), a_data * b_data, backward)


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Matrix product over the last two axes, with leading batch axes broadcast"""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise ShapeError(f"matmul: batch axes of {a.shape} and {b.shape} cannot be broadcast")
    a_data, b_data = a.data, b.data

    def backward(g):
        grad_a = np.matmul(g, np.swapaxes(b_data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a_data, -1, -2), g)
        return _unbroadcast(grad_a, a_data.shape), _unbroadcast(grad_b, b_data.shape)

    return _record("matmul", (a, b), np.matmul(a_data, b_data), backward)


def relu(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    # derivative at exactly 0 is 0
    active = x.data > 0

    def backward(g):
        return (g * active,)

    return _record("relu", (x,), np.where(active, x.data, 0.0), backward)


def tanh(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)

    def backward(g):
        return (g * (1.0 - out * out),)

    return _record("tanh", (x,), out, backward)


def absolute(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    sign = np.sign(x.data)

    def backward(g):
        return (g * sign,)

    return _record("abs", (x,), np.abs(x.data), backward)


def softmax_rows(x: ArrayLike) -> Tensor:
    """Softmax along the last axis"""
    x = as_tensor(x)
    if x.ndim < 1:
        raise ShapeError(f"softmax_rows needs at least one axis, got shape {x.shape}")
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    out = exp / exp.sum(axis=-1, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return _record("softmax_rows", (x,), out, backward)


def reshape(x: ArrayLike, shape: Tuple[int, ...]) -> Tensor:
    x = as_tensor(x)
    in_shape = x.shape
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view shape {in_shape} as {tuple(shape)}")

    def backward(g):
        return (g.reshape(in_shape),)

    return _record("reshape", (x,), out, backward)


def transpose(x: ArrayLike) -> Tensor:
    """Swap the last two axes"""
    x = as_tensor(x)
    if x.ndim < 2:
        raise ShapeError(f"transpose needs at least two axes, got shape {x.shape}")

    def backward(g):
        return (np.swapaxes(g, -1, -2),)

    return _record("transpose", (x,), np.ascontiguousarray(np.swapaxes(x.data, -1, -2)), backward)


def sum_all(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    in_shape = x.shape

    def backward(g):
        return (np.broadcast_to(g, in_shape).copy(),)

    return _record("sum", (x,), np.asarray(x.data.sum()), backward)


def mean_all(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    in_shape = x.shape
    count = max(x.size, 1)

    def backward(g):
        return (np.full(in_shape, float(g) / count),)

    return _record("mean", (x,), np.asarray(x.data.sum() / count), backward)


def eye(n: int) -> Tensor:
    return Tensor(np.eye(n))


def zeros(shape: Tuple[int, ...]) -> Tensor:
    return Tensor(np.zeros(shape))


def backward(loss: Tensor, wrt: Optional[Sequence[Tensor]] = None) -> Dict[Tensor, np.ndarray]:
    """Reverse sweep from a scalar loss; returns a gradient for every tracked leaf.

    Leaves listed in `wrt` that never reached the loss get zero gradients of their
    own shape. The tape is cleared afterwards.
    """
    if loss.size != 1:
        raise GradientError(f"backward needs a scalar loss, got shape {loss.shape}")
    tape = loss.tape
    if tape is None or not tape.owns(loss):
        raise GradientError("loss was not recorded on an active tape")

    grads: Dict[int, np.ndarray] = {loss.node_id: np.ones(loss.shape)}
    for node_id in range(loss.node_id, -1, -1):
        node = tape.nodes[node_id]
        if node.backward is None:
            continue
        g = grads.pop(node_id, None)
        if g is None:
            continue
        for input_id, input_grad in zip(node.inputs, node.backward(g)):
            if input_id < 0 or input_grad is None:
                continue
            if input_id in grads:
                grads[input_id] = grads[input_id] + input_grad
            else:
                grads[input_id] = input_grad

    result: Dict[Tensor, np.ndarray] = {}
    for node_id, leaf in tape.leaves.values():
        grad = grads.get(node_id)
        result[leaf] = np.zeros(leaf.shape) if grad is None else np.asarray(grad).reshape(leaf.shape)
    for leaf in wrt or ():
        if leaf not in result:
            result[leaf] = np.zeros(leaf.shape)

    tape.clear()
    return result
