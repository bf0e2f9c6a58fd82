from .spline import SplineCoeffs, eval_derivative, eval_spline, fit_natural_cubic
from .control_path import ControlPath, build_control_paths

__all__ = [
    'SplineCoeffs', 'fit_natural_cubic', 'eval_spline', 'eval_derivative',
    'ControlPath', 'build_control_paths',
]
