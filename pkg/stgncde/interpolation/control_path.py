
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import DomainError, ShapeError
from ..utils.logger import logger
from .spline import fit_natural_cubic


@dataclass(frozen=True)
class ControlPath:
    """Piecewise-cubic control X(t) on the grid t = 0..N, one spline per (node, channel).

    `coeffs` has shape (*batch, V, D, N, 4): per unit cell [i, i+1] the
    coefficients (a, b, c, d) of a + b*u + c*u**2 + d*u**3 with u = t - i.
    Leading batch axes are optional.
    """

    coeffs: np.ndarray

    @property
    def num_units(self) -> int:
        return self.coeffs.shape[-2]

    @property
    def window_length(self) -> int:
        return self.num_units + 1

    @property
    def batch_shape(self):
        return self.coeffs.shape[:-4]

    def __len__(self) -> int:
        if not self.batch_shape:
            raise TypeError("an unbatched ControlPath has no length")
        return self.coeffs.shape[0]

    def __getitem__(self, index) -> "ControlPath":
        return ControlPath(self.coeffs[index])

    def _interpret_t(self, t: float):
        t = float(t)
        if t < -1e-9 or t > self.num_units + 1e-9:
            raise DomainError(f"t={t} lies outside the window [0, {self.num_units}]")
        index = min(max(int(np.floor(t)), 0), self.num_units - 1)
        return index, t - index

    def evaluate(self, t: float) -> np.ndarray:
        """X(t) with shape (*batch, V, D)"""
        index, u = self._interpret_t(t)
        a, b, c, d = np.moveaxis(self.coeffs[..., index, :], -1, 0)
        return a + u * (b + u * (c + u * d))

    def derivative(self, t: float) -> np.ndarray:
        """dX/dt with shape (*batch, V, D)"""
        index, u = self._interpret_t(t)
        _, b, c, d = np.moveaxis(self.coeffs[..., index, :], -1, 0)
        return b + u * (2.0 * c + 3.0 * u * d)

def build_control_paths(
    window: np.ndarray,
    mask: Optional[np.ndarray] = None,
    fill_value: Union[Sequence[float], np.ndarray, None] = None,
) -> ControlPath:
    """Fit natural cubic splines through the observed knots of every (node, channel).

    window: (*batch, V, N+1, D) values on the grid t = 0..N.
    mask:   (*batch, V, N+1) booleans, True where observed; None means fully observed.
    fill_value: (D,) used for channels with no observation at all.

    Rows with a single observation become constant at that value. Rows sharing a
    mask pattern are fitted together in one call.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim < 3:
        raise ShapeError(f"window needs shape (..., V, N+1, D), got {window.shape}")
    length, channels = window.shape[-2], window.shape[-1]
    if length < 2:
        raise ShapeError(f"window needs at least 2 time points, got {length}")

    if mask is None:
        mask = np.ones(window.shape[:-1], dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != window.shape[:-1]:
        raise ShapeError(f"mask shape {mask.shape} does not match window shape {window.shape}")

    fill = np.zeros(channels) if fill_value is None else np.asarray(fill_value, dtype=np.float64).reshape(channels)

    rows = window.reshape(-1, length, channels)
    row_masks = mask.reshape(-1, length)
    num_units = length - 1
    coeffs = np.zeros((rows.shape[0], num_units, 4, channels))

    patterns, inverse = np.unique(row_masks, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    for pattern_index, pattern in enumerate(patterns):
        members = np.flatnonzero(inverse == pattern_index)
        observed = np.flatnonzero(pattern)

        if len(observed) >= 2:
            # (k, members, D) so knots lead for the fit
            values = np.moveaxis(rows[members][:, observed, :], 1, 0)
            spline = fit_natural_cubic(observed.astype(np.float64), values)
            coeffs[members] = np.moveaxis(spline.unit_segments(num_units), 2, 0)
        elif len(observed) == 1:
            coeffs[members, :, 0, :] = rows[members, observed[0], :][:, None, :]
        else:
            coeffs[members, :, 0, :] = fill

    if len(patterns) > 1:
        logger.debug(f"Fitted control paths for {rows.shape[0]} rows across {len(patterns)} mask patterns")

    # (rows, N, 4, D) -> (*batch, V, D, N, 4)
    coeffs = np.transpose(coeffs, (0, 3, 1, 2))
    return ControlPath(np.ascontiguousarray(coeffs.reshape(window.shape[:-2] + (channels, num_units, 4))))
