from typing import Optional

from ..autodiff import Tensor, absolute, as_tensor, mean_all, sum_all
from ..errors import ShapeError


def l1_loss(pred: Tensor, target, denominator: Optional[int] = None) -> Tensor:
    """Mean absolute error over every entry, recorded on the active tape.

    With `denominator` the absolute errors are summed and divided by it instead,
    so partial sums over chunks of one batch add up to the batch mean.
    """
    target = as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError(f"l1_loss: prediction shape {pred.shape} does not match target shape {target.shape}")
    errors = absolute(pred - target)
    if denominator is None:
        return mean_all(errors)
    return sum_all(errors) * (1.0 / denominator)
