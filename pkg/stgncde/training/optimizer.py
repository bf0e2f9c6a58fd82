"""Adam with L2 weight decay folded into the gradient (default) or decoupled (AdamW)."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..autodiff import Tensor


@dataclass
class AdamState:
    step: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(0, [np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
    weight_decay: float = 0.0,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
    decoupled: bool = False,
) -> List[np.ndarray]:
    """One bias-corrected Adam update; returns new parameter arrays and advances `state`"""
    beta1, beta2 = betas
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step

    updated = []
    for i, (theta, grad) in enumerate(zip(params, grads)):
        if weight_decay and not decoupled:
            grad = grad + weight_decay * theta
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad * grad
        m_hat = state.m[i] / correction1
        v_hat = state.v[i] / correction2
        step = m_hat / (np.sqrt(v_hat) + eps)
        if weight_decay and decoupled:
            step = step + weight_decay * theta
        updated.append(theta - lr * step)
    return updated


def clip_grad_norm(grads: Sequence[np.ndarray], max_norm: float) -> Tuple[List[np.ndarray], float]:
    """Scale gradients so their global L2 norm is at most max_norm; returns (grads, original norm)"""
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if max_norm <= 0 or total <= max_norm:
        return list(grads), total
    scale = max_norm / (total + 1e-12)
    return [g * scale for g in grads], total


class Adam:
    """Optimizer over a fixed list of parameter tensors"""

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, weight_decay: float = 0.0,
                 betas: Tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 decoupled_weight_decay: bool = False, grad_clip: float = 0.0):
        if lr < 0:
            raise ValueError(f"Invalid learning rate: {lr}")
        if not (0.0 <= betas[0] < 1.0 and 0.0 <= betas[1] < 1.0):
            raise ValueError(f"Invalid betas: {betas}")
        self.params = list(params)
        self.lr = lr
        self.weight_decay = weight_decay
        self.betas = betas
        self.eps = eps
        self.decoupled_weight_decay = decoupled_weight_decay
        self.grad_clip = grad_clip
        self.state = AdamState.zeros_like([p.data for p in self.params])
        self.last_grad_norm = 0.0

    def step(self, grads: Dict[Tensor, np.ndarray]):
        ordered = [grads.get(p, np.zeros_like(p.data)) for p in self.params]
        ordered, self.last_grad_norm = clip_grad_norm(ordered, self.grad_clip)
        updated = adam_step(
            [p.data for p in self.params], ordered, self.state, self.lr, self.weight_decay,
            self.betas, self.eps, self.decoupled_weight_decay,
        )
        for param, value in zip(self.params, updated):
            param.data = value
