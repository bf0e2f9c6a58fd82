from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np

from .tensor import Tape, Tensor, backward


@dataclass
class GradCheckReport:
    max_abs_error: float = 0.0
    max_rel_error: float = 0.0
    failures: List[str] = field(default_factory=list)
    analytic: Dict[str, np.ndarray] = field(default_factory=dict)
    numeric: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def numerical_gradient(fn: Callable[[], float], array: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function w.r.t. `array`, perturbed in place"""
    grad = np.zeros_like(array)
    flat = array.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + eps
        plus = fn()
        flat[i] = original - eps
        minus = fn()
        flat[i] = original
        out[i] = (plus - minus) / (2.0 * eps)
    return grad


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    eps: float = 1e-5,
    rtol: float = 1e-3,
    atol: float = 1e-8,
) -> GradCheckReport:
    """Compare backward() against central differences for every tensor in `params`.

    `loss_fn` must rebuild the scalar loss from the current parameter values each
    time it is called. An entry passes when |analytic - numeric| <= atol + rtol * |numeric|.
    """
    with Tape():
        loss = loss_fn()
        grads = backward(loss, wrt=params)

    def scalar_loss() -> float:
        return loss_fn().item()

    report = GradCheckReport()
    for index, param in enumerate(params):
        name = param.name or f"param{index}"
        analytic = grads[param]
        numeric = numerical_gradient(scalar_loss, param.data, eps)
        report.analytic[name] = analytic
        report.numeric[name] = numeric

        abs_err = np.abs(analytic - numeric)
        rel_err = abs_err / np.maximum(np.abs(numeric), atol)
        report.max_abs_error = max(report.max_abs_error, float(abs_err.max(initial=0.0)))
        report.max_rel_error = max(report.max_rel_error, float(rel_err.max(initial=0.0)))

        bad = abs_err > atol + rtol * np.abs(numeric)
        if np.any(bad):
            worst = int(np.argmax(np.where(bad, abs_err, -1.0)))
            report.failures.append(
                f"{name}: {int(bad.sum())} entries off, worst at flat index {worst} "
                f"(analytic {analytic.reshape(-1)[worst]:.6e}, numeric {numeric.reshape(-1)[worst]:.6e})"
            )
    return report
