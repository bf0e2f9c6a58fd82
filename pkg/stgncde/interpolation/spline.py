"""Natural cubic splines with linear extrapolation outside the knot range.

Each segment j stores S(t) = a + b*u + c*u**2 + d*u**3 with u = t - knot_times[j].
Values may carry trailing channel axes; all coefficient arrays then have shape
(segments, *channels).
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import SplineError

Times = Union[float, np.ndarray]


@dataclass(frozen=True)
class SplineCoeffs:
    knot_times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def num_knots(self) -> int:
        return len(self.knot_times)

    @property
    def num_segments(self) -> int:
        return len(self.knot_times) - 1

    def _locate(self, t: np.ndarray):
        index = np.searchsorted(self.knot_times, t, side="right") - 1
        index = np.clip(index, 0, self.num_segments - 1)
        return index, t - self.knot_times[index]

    def _channels(self, values: np.ndarray, t: np.ndarray) -> np.ndarray:
        # Broadcast a per-time array against the trailing channel axes
        return values.reshape(values.shape + (1,) * (self.a.ndim - 1)) if t.ndim else values

    def _boundaries(self):
        h = self.knot_times[-1] - self.knot_times[-2]
        end_value = self.a[-1] + h * (self.b[-1] + h * (self.c[-1] + h * self.d[-1]))
        end_slope = self.b[-1] + h * (2.0 * self.c[-1] + 3.0 * h * self.d[-1])
        return end_value, end_slope

    def evaluate(self, t: Times) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        index, u = self._locate(t)
        u = self._channels(u, t)
        value = self.a[index] + u * (self.b[index] + u * (self.c[index] + u * self.d[index]))

        first, last = self.knot_times[0], self.knot_times[-1]
        if np.any(t < first) or np.any(t > last):
            end_value, end_slope = self._boundaries()
            before = self._channels(t < first, t)
            after = self._channels(t > last, t)
            left = self.a[0] + self.b[0] * self._channels(t - first, t)
            right = end_value + end_slope * self._channels(t - last, t)
            value = np.where(before, left, np.where(after, right, value))
        return value

    def derivative(self, t: Times) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        index, u = self._locate(t)
        u = self._channels(u, t)
        slope = self.b[index] + u * (2.0 * self.c[index] + 3.0 * u * self.d[index])

        first, last = self.knot_times[0], self.knot_times[-1]
        if np.any(t < first) or np.any(t > last):
            _, end_slope = self._boundaries()
            before = self._channels(t < first, t)
            after = self._channels(t > last, t)
            slope = np.where(before, self.b[0], np.where(after, end_slope, slope))
        return slope

    def second_derivative(self, t: Times) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        index, u = self._locate(t)
        u = self._channels(u, t)
        curvature = 2.0 * self.c[index] + 6.0 * u * self.d[index]
        outside = self._channels((t < self.knot_times[0]) | (t > self.knot_times[-1]), t)
        return np.where(outside, 0.0, curvature)

    def unit_segments(self, num_units: int) -> np.ndarray:
        """Re-expand onto the integer grid [i, i+1], i = 0..num_units-1.

        Returns shape (num_units, 4, *channels) holding (a, b, c, d) in the local
        offset u = t - i. Knots must lie on integer times; grid cells outside the
        knot range carry the linear extrapolation.
        """
        starts = np.arange(num_units, dtype=np.float64)
        index, u = self._locate(starts)
        u = self._channels(u, starts)
        a, b, c, d = self.a[index], self.b[index], self.c[index], self.d[index]

        coeffs = np.stack([
            a + u * (b + u * (c + u * d)),
            b + u * (2.0 * c + 3.0 * u * d),
            c + 3.0 * u * d,
            d,
        ], axis=1)

        first, last = self.knot_times[0], self.knot_times[-1]
        before = starts < first
        if np.any(before):
            shift = self._channels(starts[before] - first, starts[before])
            coeffs[before, 0] = self.a[0] + self.b[0] * shift
            coeffs[before, 1] = self.b[0]
            coeffs[before, 2:] = 0.0
        after = starts >= last
        if np.any(after):
            end_value, end_slope = self._boundaries()
            shift = self._channels(starts[after] - last, starts[after])
            coeffs[after, 0] = end_value + end_slope * shift
            coeffs[after, 1] = end_slope
            coeffs[after, 2:] = 0.0
        return coeffs


def fit_natural_cubic(times, values) -> SplineCoeffs:
    """Natural cubic spline through (times[i], values[i]); extra value axes are channels"""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if times.ndim != 1 or len(times) < 2:
        raise SplineError(f"A spline needs at least 2 knots, got {times.size}")
    if values.shape[0] != len(times):
        raise SplineError(f"Got {len(times)} knot times but {values.shape[0]} values")
    if np.any(np.diff(times) <= 0):
        raise SplineError(f"Knot times must be strictly increasing: {times.tolist()}")

    spline = CubicSpline(times, values, axis=0, bc_type="natural")
    # scipy orders coefficients from the highest power down
    d, c, b, a = spline.c
    return SplineCoeffs(knot_times=times, a=a.copy(), b=b.copy(), c=c.copy(), d=d.copy())


def eval_spline(spline: SplineCoeffs, t: Times) -> np.ndarray:
    return spline.evaluate(t)


def eval_derivative(spline: SplineCoeffs, t: Times) -> np.ndarray:
    return spline.derivative(t)
