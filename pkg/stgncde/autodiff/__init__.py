from .tensor import (
    Tape,
    Tensor,
    absolute,
    active_tape,
    add,
    as_tensor,
    backward,
    eye,
    matmul,
    mean_all,
    mul,
    parameter,
    relu,
    reshape,
    softmax_rows,
    sub,
    sum_all,
    tanh,
    tensor,
    transpose,
    zeros,
)
from .gradcheck import GradCheckReport, check_gradients, numerical_gradient

__all__ = [
    'Tape', 'Tensor', 'absolute', 'active_tape', 'add', 'as_tensor', 'backward', 'eye',
    'matmul', 'mean_all', 'mul', 'parameter', 'relu', 'reshape', 'softmax_rows', 'sub',
    'sum_all', 'tanh', 'tensor', 'transpose', 'zeros',
    'GradCheckReport', 'check_gradients', 'numerical_gradient',
]
